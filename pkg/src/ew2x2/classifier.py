"""Predict the limit of the dynamic from (game, initialization, step size).

Ten numbered rows cover every non-degenerate game: the row is a function of
the exact signs of the payoff gaps, the exact signs of the two initial
advantage functionals, and whether those functionals are exactly equal
(which is what "identical initialization" means to the convergence
guarantees). Zero-second-gap games are classified through the documented
action-relabeling symmetry and mapped back.

A prediction is a *set* of acceptable limit objects plus a rate class:
Exponential rows must decide within any reasonable horizon, Asymptotic rows
may legitimately time out (the verdict Undecided then scores Pending, not
Mismatch). Rows whose guarantee carries a step-size requirement degrade to
NoGuarantee when the requirement is violated; any observed behavior is then
vacuously acceptable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .dynamics import DynState, LimitVerdict, VerdictKind, ew_step
from .equilibria import MixedFamily
from .errors import InvalidParameterError
from .games import (
    Action,
    MixedStrategy,
    SignRegime,
    SymmetricGame,
    symmetric_mixed_profile,
    theta1_advantage,
)

#: Profile-matching tolerance when comparing verdict mixtures to predictions.
PROFILE_TOL = 1e-9


class TableRow(Enum):
    R1 = "r1"
    R2 = "r2"
    R3 = "r3"
    R4 = "r4"
    R5 = "r5"
    R6 = "r6"
    R7 = "r7"
    R8 = "r8"
    R9 = "r9"
    R10 = "r10"
    SPECIAL = "special"


class Rate(Enum):
    EXPONENTIAL = "exponential"
    ASYMPTOTIC = "asymptotic"
    NONE = "none"


class Agreement(Enum):
    MATCH = "Match"
    SET_MATCH = "SetMatch"
    PENDING = "Pending"
    MISMATCH = "Mismatch"


@dataclass(frozen=True)
class PredictedLimit:
    """Set of limit objects the theory allows for a run.

    ``no_guarantee`` marks predictions that are vacuous (step-size
    requirement violated, or an initialization outside the assumptions whose
    limit is not characterized); membership then accepts anything.
    ``fixed_profile`` is the one-element set used for zero-advantage
    initializations that provably never move.
    """

    pure_pairs: tuple[tuple[Action, Action], ...] = ()
    mixed: Optional[MixedStrategy] = None
    families: tuple[MixedFamily, ...] = ()
    fixed_profile: Optional[tuple[MixedStrategy, MixedStrategy]] = None
    no_guarantee: bool = False

    def size(self) -> int:
        return (
            len(self.pure_pairs)
            + (1 if self.mixed is not None else 0)
            + len(self.families)
            + (1 if self.fixed_profile is not None else 0)
        )

    def contains(self, verdict: LimitVerdict) -> bool:
        if self.no_guarantee:
            return True
        if verdict.kind is VerdictKind.PURE_NE:
            if verdict.pair in self.pure_pairs:
                return True
            return any(f.contains_pair(verdict.pair) for f in self.families)
        if verdict.kind is VerdictKind.STRICT_MIXED_NE:
            if self.mixed is not None and _profile_close(
                verdict.profile, (self.mixed, self.mixed)
            ):
                return True
            if self.fixed_profile is not None and _profile_close(
                verdict.profile, self.fixed_profile
            ):
                return True
            return False
        if verdict.kind is VerdictKind.MIXED_FAMILY_NE:
            for fam in self.families:
                pinned = verdict.profile[fam.pinned_player - 1]
                target = 1.0 if fam.pinned_action is Action.THETA1 else 0.0
                if abs(pinned.p1 - target) <= PROFILE_TOL:
                    return True
            return False
        return False


def _profile_close(
    got: tuple[MixedStrategy, MixedStrategy], want: tuple[MixedStrategy, MixedStrategy]
) -> bool:
    return all(
        abs(g.p1 - w.p1) <= PROFILE_TOL and abs(g.p2 - w.p2) <= PROFILE_TOL
        for g, w in zip(got, want)
    )


@dataclass(frozen=True)
class RegimePrediction:
    row: TableRow
    predicted: PredictedLimit
    rate: Rate
    eta_requirement: Optional[float] = None  # upper bound on eta, or None
    eta_satisfied: bool = True
    relabeled: bool = False
    note: str = ""

    def to_json_dict(self) -> dict:
        pred: dict = {"no_guarantee": self.predicted.no_guarantee}
        pred["pure_pairs"] = [[str(a) for a in pair] for pair in self.predicted.pure_pairs]
        if self.predicted.mixed is not None:
            pred["mixed"] = list(self.predicted.mixed.as_tuple())
        if self.predicted.families:
            pred["families"] = [str(f) for f in self.predicted.families]
        if self.predicted.fixed_profile is not None:
            pred["fixed_profile"] = [list(s.as_tuple()) for s in self.predicted.fixed_profile]
        return {
            "row": self.row.value,
            "predicted": pred,
            "rate": self.rate.value,
            "eta_requirement": self.eta_requirement,
            "eta_satisfied": self.eta_satisfied,
            "relabeled": self.relabeled,
            "note": self.note,
        }


def classify(
    game: SymmetricGame, init: tuple[MixedStrategy, MixedStrategy], eta: float
) -> RegimePrediction:
    """Map a run configuration to its row and predicted limit set."""
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    game.require_nondegenerate()
    s1, s2 = init

    if s1.is_pure() or s2.is_pure():
        return RegimePrediction(
            row=TableRow.SPECIAL,
            predicted=PredictedLimit(no_guarantee=True),
            rate=Rate.NONE,
            note="pure-strategy initialization: frozen player; limit not characterized",
        )

    d1 = theta1_advantage(game, s1)
    d2 = theta1_advantage(game, s2)
    if d1 == 0.0 and d2 == 0.0:
        return RegimePrediction(
            row=TableRow.SPECIAL,
            predicted=PredictedLimit(fixed_profile=(s1, s2)),
            rate=Rate.NONE,
            note="both advantages zero at t=1: the state never moves",
        )
    if d1 == 0.0 or d2 == 0.0:
        stepped = ew_step(game, DynState.initial(s1, s2), eta)
        inner = classify(game, (stepped.p1, stepped.p2), eta)
        return RegimePrediction(
            row=TableRow.SPECIAL,
            predicted=inner.predicted,
            rate=inner.rate,
            eta_requirement=inner.eta_requirement,
            eta_satisfied=inner.eta_satisfied,
            relabeled=inner.relabeled,
            note=f"one advantage zero at t=1; both nonzero from t=2 (then row {inner.row.value})",
        )

    regime = game.sign_regime()
    t1, t2 = Action.THETA1, Action.THETA2

    if regime in (SignRegime.NEG_ZERO, SignRegime.POS_ZERO):
        inner = classify(game.relabeled(), (s1.swapped(), s2.swapped()), eta)
        return RegimePrediction(
            row=inner.row,
            predicted=_relabel_prediction(inner.predicted),
            rate=inner.rate,
            eta_requirement=inner.eta_requirement,
            eta_satisfied=inner.eta_satisfied,
            relabeled=True,
            note="classified through the action-relabeling symmetry",
        )

    if regime is SignRegime.NEG_NEG:
        return RegimePrediction(
            TableRow.R1, PredictedLimit(pure_pairs=((t2, t2),)), Rate.EXPONENTIAL
        )
    if regime is SignRegime.POS_POS:
        return RegimePrediction(
            TableRow.R2, PredictedLimit(pure_pairs=((t1, t1),)), Rate.EXPONENTIAL
        )

    if regime is SignRegime.NEG_POS:
        asym = ((t1, t2), (t2, t1))
        if d1 == d2:
            return _with_eta_requirement(
                game,
                eta,
                TableRow.R5,
                PredictedLimit(mixed=symmetric_mixed_profile(game)),
                Rate.ASYMPTOTIC,
            )
        if d1 * d2 < 0.0:
            return RegimePrediction(
                TableRow.R3, PredictedLimit(pure_pairs=asym), Rate.EXPONENTIAL
            )
        return RegimePrediction(
            TableRow.R4, PredictedLimit(pure_pairs=asym), Rate.ASYMPTOTIC
        )

    if regime is SignRegime.POS_NEG:
        if d1 * d2 > 0.0:
            # The common advantage sign pins which symmetric corner wins.
            pair = (t1, t1) if d1 > 0.0 else (t2, t2)
            return RegimePrediction(
                TableRow.R6, PredictedLimit(pure_pairs=(pair,)), Rate.EXPONENTIAL
            )
        return _with_eta_requirement(
            game,
            eta,
            TableRow.R7,
            PredictedLimit(
                pure_pairs=((t1, t1), (t2, t2)), mixed=symmetric_mixed_profile(game)
            ),
            Rate.ASYMPTOTIC,
        )

    if regime is SignRegime.ZERO_NEG:
        return RegimePrediction(
            TableRow.R8, PredictedLimit(pure_pairs=((t2, t2),)), Rate.EXPONENTIAL
        )

    # eps1 == 0, eps2 > 0
    if d1 == d2:
        return RegimePrediction(
            TableRow.R9, PredictedLimit(pure_pairs=((t1, t1),)), Rate.ASYMPTOTIC
        )
    return RegimePrediction(
        TableRow.R10,
        PredictedLimit(families=(MixedFamily(1, t1), MixedFamily(2, t1))),
        Rate.ASYMPTOTIC,
    )


def eta_threshold(game: SymmetricGame) -> float:
    """The step-size bound 8 / (|eps1| + |eps2|) below which the
    mixed-limit guarantees apply."""
    e1, e2 = game.eps()
    return 8.0 / (abs(e1) + abs(e2))


def _with_eta_requirement(
    game: SymmetricGame,
    eta: float,
    row: TableRow,
    predicted: PredictedLimit,
    rate: Rate,
) -> RegimePrediction:
    bound = eta_threshold(game)
    # The guarantee is a strict inequality; at or above the bound there is
    # no statement either way (counterexamples exist above it).
    if eta < bound:
        return RegimePrediction(row, predicted, rate, eta_requirement=bound)
    return RegimePrediction(
        row,
        PredictedLimit(no_guarantee=True),
        Rate.NONE,
        eta_requirement=bound,
        eta_satisfied=False,
        note="step size at or above the guarantee bound: no prediction",
    )


def _relabel_prediction(p: PredictedLimit) -> PredictedLimit:
    return PredictedLimit(
        pure_pairs=tuple((x.other(), y.other()) for (x, y) in p.pure_pairs),
        mixed=p.mixed.swapped() if p.mixed is not None else None,
        families=tuple(
            MixedFamily(f.pinned_player, f.pinned_action.other()) for f in p.families
        ),
        fixed_profile=(
            tuple(s.swapped() for s in p.fixed_profile)
            if p.fixed_profile is not None
            else None
        ),
        no_guarantee=p.no_guarantee,
    )


def check_prediction(prediction: RegimePrediction, verdict: LimitVerdict) -> Agreement:
    """Score an observed verdict against a prediction.

    Mismatch under a satisfied step-size requirement is a genuine failure of
    either the theory implementation or the detector; vacuous predictions
    match anything, and Undecided under an asymptotic-rate row is Pending.
    """
    if prediction.predicted.no_guarantee:
        return Agreement.MATCH
    if verdict.kind is VerdictKind.UNDECIDED:
        return (
            Agreement.PENDING if prediction.rate is Rate.ASYMPTOTIC else Agreement.MISMATCH
        )
    if prediction.predicted.contains(verdict):
        return Agreement.MATCH if prediction.predicted.size() == 1 else Agreement.SET_MATCH
    return Agreement.MISMATCH
