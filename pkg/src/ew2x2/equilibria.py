"""Nash and correlated equilibria of 2x2 symmetric games.

The pure/mixed Nash landscape is a closed-form function of the signs of the
payoff gaps (see ``nash_landscape``); every entry is cross-checkable against
the brute-force deviation test ``is_pure_nash``. Correlated-equilibrium
membership is offered through two independent routes:

* ``is_correlated_eq_bruteforce`` evaluates the four recommendation-
  deviation inequalities directly from the payoff matrix, and
* ``is_correlated_eq_closed_form`` evaluates the per-sign-regime reduction
  of those inequalities to gap-ratio comparisons.

The two must agree except within a float-noise band of the polytope
boundary; tests sweep random joint distributions per regime and report
borderline draws instead of failing on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidParameterError
from .games import (
    Action,
    MixedStrategy,
    SignRegime,
    SymmetricGame,
    symmetric_mixed_profile,
)

#: Slack for the weak deviation inequalities in pure-NE verification.
PURE_NE_TOL = 1e-12
#: Slack for each comparison in correlated-equilibrium membership.
CE_TOL = 1e-9
#: Half-width of the borderline band around tight CE inequalities.
CE_BORDERLINE = 2e-9

_PAIRS = (
    (Action.THETA1, Action.THETA1),
    (Action.THETA1, Action.THETA2),
    (Action.THETA2, Action.THETA1),
    (Action.THETA2, Action.THETA2),
)


@dataclass(frozen=True)
class MixedFamily:
    """A one-parameter family of equilibria: one player pinned to a pure
    action, the other free to play any mixture."""

    pinned_player: int  # 1 or 2
    pinned_action: Action

    def contains_pair(self, pair: tuple[Action, Action]) -> bool:
        if self.pinned_player == 1:
            return pair[0] is self.pinned_action
        return pair[1] is self.pinned_action

    def __str__(self) -> str:
        if self.pinned_player == 1:
            return f"({self.pinned_action}, p)"
        return f"(p, {self.pinned_action})"


@dataclass(frozen=True)
class NashSet:
    """Complete Nash landscape of one game."""

    pure: tuple[tuple[Action, Action], ...]
    mixed: Optional[MixedStrategy] = None  # symmetric strictly mixed profile
    mixed_families: tuple[MixedFamily, ...] = ()


def is_pure_nash(game: SymmetricGame, pair: tuple[Action, Action]) -> bool:
    """Brute-force check that neither player gains by unilateral deviation.

    Weak inequalities: a deviation gain up to PURE_NE_TOL still counts as an
    equilibrium.
    """
    own, other = pair
    gain1 = game.payoff1(own.other(), other) - game.payoff1(own, other)
    # Player 2's payoff is u1 with roles swapped.
    gain2 = game.payoff1(other.other(), own) - game.payoff1(other, own)
    return gain1 <= PURE_NE_TOL and gain2 <= PURE_NE_TOL


def nash_landscape(game: SymmetricGame) -> NashSet:
    """All Nash equilibria, keyed on the exact signs of (eps1, eps2)."""
    game.require_nondegenerate()
    t1, t2 = Action.THETA1, Action.THETA2
    regime = game.sign_regime()
    if regime is SignRegime.NEG_NEG:
        return NashSet(pure=((t2, t2),))
    if regime is SignRegime.POS_POS:
        return NashSet(pure=((t1, t1),))
    if regime is SignRegime.NEG_POS:
        return NashSet(pure=((t1, t2), (t2, t1)), mixed=symmetric_mixed_profile(game))
    if regime is SignRegime.POS_NEG:
        return NashSet(pure=((t1, t1), (t2, t2)), mixed=symmetric_mixed_profile(game))
    if regime is SignRegime.ZERO_NEG:
        return NashSet(pure=((t1, t1), (t2, t2)))
    if regime is SignRegime.ZERO_POS:
        return NashSet(
            pure=((t1, t1), (t2, t1), (t1, t2)),
            mixed_families=(MixedFamily(1, t1), MixedFamily(2, t1)),
        )
    # eps2 == 0: relabel actions, reuse the eps1 == 0 rows, relabel back.
    relabeled = nash_landscape(game.relabeled())
    return NashSet(
        pure=tuple((x.other(), y.other()) for (x, y) in relabeled.pure),
        mixed=relabeled.mixed.swapped() if relabeled.mixed is not None else None,
        mixed_families=tuple(
            MixedFamily(f.pinned_player, f.pinned_action.other())
            for f in relabeled.mixed_families
        ),
    )


@dataclass(frozen=True)
class JointDistribution:
    """A joint distribution over action pairs (row player 1, column player 2).

    nu11 is the probability of (theta1, theta1), nu12 of (theta1, theta2),
    and so on.
    """

    nu11: float
    nu12: float
    nu21: float
    nu22: float

    def __post_init__(self):
        vals = (self.nu11, self.nu12, self.nu21, self.nu22)
        if any(not math.isfinite(v) for v in vals):
            raise InvalidParameterError("joint probabilities must be finite")
        if any(v < 0.0 for v in vals):
            raise InvalidParameterError(f"negative joint probability in {vals}")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise InvalidParameterError(f"joint probabilities sum to {sum(vals)!r}, not 1")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.nu11, self.nu12, self.nu21, self.nu22)

    def prob(self, pair: tuple[Action, Action]) -> float:
        index = {
            (Action.THETA1, Action.THETA1): self.nu11,
            (Action.THETA1, Action.THETA2): self.nu12,
            (Action.THETA2, Action.THETA1): self.nu21,
            (Action.THETA2, Action.THETA2): self.nu22,
        }
        return index[pair]

    @classmethod
    def point_mass(cls, pair: tuple[Action, Action]) -> "JointDistribution":
        vals = {p: 0.0 for p in _PAIRS}
        vals[pair] = 1.0
        return cls(*(vals[p] for p in _PAIRS))

    @classmethod
    def product(cls, s1: MixedStrategy, s2: MixedStrategy) -> "JointDistribution":
        return cls(s1.p1 * s2.p1, s1.p1 * s2.p2, s1.p2 * s2.p1, s1.p2 * s2.p2)


def deviation_gains(game: SymmetricGame, nu: JointDistribution) -> tuple[float, ...]:
    """The four expected gains from deviating off a recommendation.

    Order: player 1 recommended theta1 / theta2, player 2 recommended
    theta1 / theta2. Each entry is the expected payoff change when the
    recommended action is replaced by the other action while the opponent
    follows the signal; all four must be <= 0 at a correlated equilibrium.
    """
    gains = []
    for rec in (Action.THETA1, Action.THETA2):
        dev = rec.other()
        gains.append(
            sum(
                nu.prob((rec, other)) * (game.payoff1(dev, other) - game.payoff1(rec, other))
                for other in (Action.THETA1, Action.THETA2)
            )
        )
    for rec in (Action.THETA1, Action.THETA2):
        dev = rec.other()
        gains.append(
            sum(
                # Player 2's payoff for (first, rec) is u1(rec, first).
                nu.prob((first, rec)) * (game.payoff1(dev, first) - game.payoff1(rec, first))
                for first in (Action.THETA1, Action.THETA2)
            )
        )
    return tuple(gains)


def is_correlated_eq_bruteforce(game: SymmetricGame, nu: JointDistribution) -> bool:
    """Membership straight from the deviation inequalities, slack CE_TOL."""
    return all(g <= CE_TOL for g in deviation_gains(game, nu))


def is_correlated_eq_closed_form(game: SymmetricGame, nu: JointDistribution) -> bool:
    """Membership from the per-regime closed-form reduction, slack CE_TOL.

    The reductions (all derived from the same four inequalities):

    * eps1 < 0 < eps2:  max{(|e1|/e2) nu11, (e2/|e1|) nu22} <= min{nu12, nu21}
    * eps1 > 0 > eps2:  nu11 >= (|e2|/e1) max{nu12, nu21}  and
                        nu22 >= (e1/|e2|) max{nu12, nu21}
    * eps1 = 0, eps2 < 0:  nu12 = nu21 = 0
    * eps1 = 0, eps2 > 0:  nu22 = 0
    * matched strict signs: the point mass on the dominant pure pair
    * eps2 = 0 cases: relabel actions and reuse the eps1 = 0 logic.
    """
    game.require_nondegenerate()
    e1, e2 = game.eps()
    regime = game.sign_regime()
    n11, n12, n21, n22 = nu.as_tuple()

    if regime is SignRegime.NEG_NEG:
        return n22 >= 1.0 - CE_TOL and max(n11, n12, n21) <= CE_TOL
    if regime is SignRegime.POS_POS:
        return n11 >= 1.0 - CE_TOL and max(n12, n21, n22) <= CE_TOL
    if regime is SignRegime.NEG_POS:
        lhs = max((abs(e1) / e2) * n11, (e2 / abs(e1)) * n22)
        return lhs <= min(n12, n21) + CE_TOL
    if regime is SignRegime.POS_NEG:
        off = max(n12, n21)
        return (
            n11 + CE_TOL >= (abs(e2) / e1) * off
            and n22 + CE_TOL >= (e1 / abs(e2)) * off
        )
    if regime is SignRegime.ZERO_NEG:
        return n12 <= CE_TOL and n21 <= CE_TOL
    if regime is SignRegime.ZERO_POS:
        return n22 <= CE_TOL
    # eps2 == 0: swapping both players' actions maps nu11<->nu22, nu12<->nu21.
    swapped = JointDistribution(n22, n21, n12, n11)
    return is_correlated_eq_closed_form(game.relabeled(), swapped)


def recommendation_masses(nu: JointDistribution) -> tuple[float, float, float, float]:
    """Marginal mass behind each recommendation, ordered as deviation_gains."""
    return (
        nu.nu11 + nu.nu12,
        nu.nu21 + nu.nu22,
        nu.nu11 + nu.nu21,
        nu.nu12 + nu.nu22,
    )


def ce_borderline(game: SymmetricGame, nu: JointDistribution) -> bool:
    """True when some binding deviation inequality is within CE_BORDERLINE
    of tight, where the two membership routes may legitimately differ.

    Inequalities whose recommendation carries no mass are identically zero
    and constrain nothing; they do not count.
    """
    masses = recommendation_masses(nu)
    return any(
        abs(g) <= CE_BORDERLINE and m > 0.0
        for g, m in zip(deviation_gains(game, nu), masses)
    )
