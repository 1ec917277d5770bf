"""Exponential-weights dynamics on 2x2 symmetric games.

Library layout:

* games        -- payoff matrices, gap parameterization, mixed strategies
* equilibria   -- Nash landscape and correlated-equilibrium membership
* dynamics     -- the exponential-weights dynamic, trajectories, verdicts
* theory       -- decay envelopes, flip bounds, contraction map, constructions
* classifier   -- (game, init, eta) -> predicted limit set
* bank         -- the two-bank mortgage competition game generator
* sweep        -- seeded experiment campaigns and verification reports
* reporting    -- CSV/JSON emission
* plots        -- matplotlib figure rendering to files
* cli          -- the `ew2x2` command line
"""

from .games import (
    Action,
    MixedStrategy,
    SignRegime,
    SymmetricGame,
    expected_utility,
    game_from_dict,
    game_from_eps,
    game_from_json,
    symmetric_mixed_profile,
    theta1_advantage,
)
from .equilibria import (
    JointDistribution,
    MixedFamily,
    NashSet,
    is_correlated_eq_bruteforce,
    is_correlated_eq_closed_form,
    is_pure_nash,
    nash_landscape,
)
from .dynamics import (
    DEFAULT_TOLERANCES,
    DetectorTolerances,
    DynState,
    FlipEvent,
    FlipKind,
    LimitVerdict,
    Trajectory,
    VerdictKind,
    detect_limit,
    ew_step,
    flip_events,
    simulate,
)
from .theory import (
    ContractionMap,
    construct_mixed_limit_init,
    construct_oscillation_identical,
    construct_oscillation_opposite,
    contraction_map,
    decay_envelope_report,
    two_flip_bound,
)
from .classifier import (
    Agreement,
    PredictedLimit,
    Rate,
    RegimePrediction,
    TableRow,
    check_prediction,
    classify,
    eta_threshold,
)
from .bank import (
    BankConfig,
    BankParams,
    PiecewiseUniform,
    TruncatedGaussian,
    band_profit,
    dominance_check,
    reduce_to_2x2,
    run_bank_experiment,
    utility_matrix,
)

__version__ = "0.1.0"
