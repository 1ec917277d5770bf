"""Two-player, two-action symmetric games and their gap parameterization.

A symmetric 2x2 game is fully described by player 1's payoff matrix

                     opponent plays theta1   opponent plays theta2
    play theta1              a                       c
    play theta2              b                       d

player 2's matrix being the transpose (u2(x, y) = u1(y, x)). Everything in
this package conditions on the two payoff gaps

    eps1 = a - b   (advantage of theta1 when the opponent plays theta1)
    eps2 = c - d   (advantage of theta1 when the opponent plays theta2)

whose exact signs select the equilibrium landscape and the long-run behavior
of the exponential-weights dynamic. Sign tests are exact comparisons with
0.0: the zero-gap rows are structurally different regimes, so callers
constructing games from measured data must pre-round.

Games with eps1 == eps2 == 0 are representable but degenerate; every
downstream operation rejects them with DegenerateGameError.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .errors import DegenerateGameError, InvalidParameterError

#: Tolerance on the simplex constraint |p1 + p2 - 1| for mixed strategies.
SIMPLEX_TOL = 1e-12


class Action(Enum):
    THETA1 = 1
    THETA2 = 2

    def other(self) -> "Action":
        return Action.THETA2 if self is Action.THETA1 else Action.THETA1

    def __str__(self) -> str:
        return "theta1" if self is Action.THETA1 else "theta2"


class SignRegime(Enum):
    """Joint sign of (eps1, eps2), with zeros kept as their own cases."""

    NEG_NEG = "NegNeg"
    POS_POS = "PosPos"
    NEG_POS = "NegPos"
    POS_NEG = "PosNeg"
    ZERO_NEG = "ZeroNeg"
    ZERO_POS = "ZeroPos"
    NEG_ZERO = "NegZero"
    POS_ZERO = "PosZero"
    DEGENERATE = "Degenerate"

    @property
    def mixed_sign(self) -> bool:
        """True when eps1 and eps2 are both nonzero with opposite signs."""
        return self in (SignRegime.NEG_POS, SignRegime.POS_NEG)


def _sign_char(x: float) -> str:
    if x > 0.0:
        return "+"
    if x < 0.0:
        return "-"
    return "0"


_REGIME_BY_SIGNS = {
    ("-", "-"): SignRegime.NEG_NEG,
    ("+", "+"): SignRegime.POS_POS,
    ("-", "+"): SignRegime.NEG_POS,
    ("+", "-"): SignRegime.POS_NEG,
    ("0", "-"): SignRegime.ZERO_NEG,
    ("0", "+"): SignRegime.ZERO_POS,
    ("-", "0"): SignRegime.NEG_ZERO,
    ("+", "0"): SignRegime.POS_ZERO,
    ("0", "0"): SignRegime.DEGENERATE,
}


@dataclass(frozen=True)
class SymmetricGame:
    """Payoff entries of player 1; player 2's matrix is the transpose.

    Immutable after construction, safe to share across threads.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameterError(f"payoff {name!r} must be finite, got {v}")

    def eps1(self) -> float:
        return self.a - self.b

    def eps2(self) -> float:
        return self.c - self.d

    def eps(self) -> tuple[float, float]:
        """Both payoff gaps, (a - b, c - d), as IEEE subtractions."""
        return (self.a - self.b, self.c - self.d)

    def is_degenerate(self) -> bool:
        return self.eps1() == 0.0 and self.eps2() == 0.0

    def sign_regime(self) -> SignRegime:
        e1, e2 = self.eps()
        return _REGIME_BY_SIGNS[(_sign_char(e1), _sign_char(e2))]

    def require_nondegenerate(self) -> None:
        if self.is_degenerate():
            raise DegenerateGameError(
                "game has eps1 == eps2 == 0; every profile is an equilibrium"
            )

    def payoff1(self, own: Action, other: Action) -> float:
        """u1(own, other): player 1 plays `own` against player 2's `other`."""
        if own is Action.THETA1:
            return self.a if other is Action.THETA1 else self.c
        return self.b if other is Action.THETA1 else self.d

    def relabeled(self) -> "SymmetricGame":
        """The same game with theta1 and theta2 swapped for both players.

        Maps (eps1, eps2) to (-eps2, -eps1); used to reduce the eps2 == 0
        cases to the eps1 == 0 analysis.
        """
        return SymmetricGame(a=self.d, b=self.c, c=self.b, d=self.a)

    def scaled(self, lam: float) -> "SymmetricGame":
        return SymmetricGame(self.a * lam, self.b * lam, self.c * lam, self.d * lam)

    def to_json_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}


def game_from_eps(eps1: float, eps2: float) -> SymmetricGame:
    """Realize a game with the requested gaps as (a=eps1, b=0, c=eps2, d=0).

    The dynamic depends on payoffs only through the gaps, so this canonical
    realization is enough for constructions and sweeps.
    """
    return SymmetricGame(a=eps1, b=0.0, c=eps2, d=0.0)


def _reject_nonfinite(token: str):
    raise InvalidParameterError(f"non-finite payoff token {token!r} in game record")


def game_from_json(text: str) -> SymmetricGame:
    """Parse a {"a":..,"b":..,"c":..,"d":..} record, rejecting NaN/Inf."""
    record = json.loads(text, parse_constant=_reject_nonfinite)
    return game_from_dict(record)


def game_from_dict(record: dict) -> SymmetricGame:
    if not isinstance(record, dict):
        raise InvalidParameterError("game record must be a JSON object")
    missing = {"a", "b", "c", "d"} - record.keys()
    if missing:
        raise InvalidParameterError(f"game record is missing keys {sorted(missing)}")
    vals = {}
    for key in ("a", "b", "c", "d"):
        v = record[key]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvalidParameterError(f"game record field {key!r} must be a finite number")
        vals[key] = float(v)
    return SymmetricGame(**vals)


@dataclass(frozen=True)
class MixedStrategy:
    """A point (p1, p2) on the 2-simplex: probabilities of theta1 and theta2."""

    p1: float
    p2: float

    def __post_init__(self):
        if not (math.isfinite(self.p1) and math.isfinite(self.p2)):
            raise InvalidParameterError("strategy probabilities must be finite")
        if self.p1 < 0.0 or self.p2 < 0.0:
            raise InvalidParameterError(f"negative probability in ({self.p1}, {self.p2})")
        if abs(self.p1 + self.p2 - 1.0) > SIMPLEX_TOL:
            raise InvalidParameterError(
                f"probabilities sum to {self.p1 + self.p2!r}, not 1 within {SIMPLEX_TOL}"
            )

    def is_pure(self) -> bool:
        return min(self.p1, self.p2) == 0.0

    @classmethod
    def from_p1(cls, p1: float) -> "MixedStrategy":
        return cls(p1, 1.0 - p1)

    @classmethod
    def from_log_ratio(cls, u: float) -> "MixedStrategy":
        """Strategy with ln(p1/p2) = u, built with the stable logistic."""
        if u >= 0.0:
            z = math.exp(-u)
            return cls(1.0 / (1.0 + z), z / (1.0 + z))
        z = math.exp(u)
        return cls(z / (1.0 + z), 1.0 / (1.0 + z))

    def log_ratio(self) -> float:
        """ln(p1/p2); +-inf for pure strategies."""
        if self.p1 == 0.0:
            return -math.inf
        if self.p2 == 0.0:
            return math.inf
        return math.log(self.p1) - math.log(self.p2)

    def ratio(self) -> float:
        """p1/p2; inf for the pure theta1 strategy."""
        if self.p2 == 0.0:
            return math.inf
        return self.p1 / self.p2

    def swapped(self) -> "MixedStrategy":
        return MixedStrategy(self.p2, self.p1)

    def as_tuple(self) -> tuple[float, float]:
        return (self.p1, self.p2)


def expected_utility(
    game: SymmetricGame, player: int, own: MixedStrategy, other: MixedStrategy
) -> float:
    """Expected payoff of `player` using mixture `own` against `other`.

    Both players share the single player-1 bilinear form evaluated with the
    focal player's mixture first, so the symmetry u2(x, y) = u1(y, x) is
    structural (bit-identical, not just approximate).
    """
    if player not in (1, 2):
        raise InvalidParameterError(f"player must be 1 or 2, got {player}")
    return (
        own.p1 * (game.a * other.p1 + game.c * other.p2)
        + own.p2 * (game.b * other.p1 + game.d * other.p2)
    )


def theta1_advantage(game: SymmetricGame, s: MixedStrategy) -> float:
    """Expected gain of theta1 over theta2 against the mixture ``s``.

    Equals p1*eps1 + p2*eps2 and coincides with (eps1*r + eps2)/(1 + r) at
    r = p1/p2. Its sign at each player's current mixture is what drives the
    opponent's ratio update in the exponential-weights dynamic.
    """
    e1, e2 = game.eps()
    return s.p1 * e1 + s.p2 * e2


def advantage_from_log_ratio(game: SymmetricGame, u: float) -> float:
    """theta1_advantage at the strategy with ln(p1/p2) = u.

    Same arithmetic as theta1_advantage applied to the stable-logistic
    reconstruction, so trajectories and strategy-space evaluations agree
    bit-for-bit.
    """
    e1, e2 = game.eps()
    if u >= 0.0:
        z = math.exp(-u)
        scale = 1.0 + z
        return (1.0 / scale) * e1 + (z / scale) * e2
    z = math.exp(u)
    scale = 1.0 + z
    return (z / scale) * e1 + (1.0 / scale) * e2


def ratio_root(game: SymmetricGame) -> float:
    """|eps2|/|eps1|, the unique ratio where theta1_advantage vanishes.

    Only meaningful when eps1*eps2 < 0; raises otherwise.
    """
    e1, e2 = game.eps()
    if not (e1 * e2 < 0.0):
        from .errors import WrongRegimeError

        raise WrongRegimeError(
            f"advantage root requires opposite-sign gaps, got ({e1}, {e2})"
        )
    return abs(e2) / abs(e1)


def symmetric_mixed_profile(game: SymmetricGame) -> MixedStrategy:
    """The strictly mixed symmetric equilibrium strategy.

    (|eps2|, |eps1|) / (|eps1| + |eps2|); defined when eps1*eps2 < 0 (both
    players indifferent there) and, as a boundary case of the same formula,
    when exactly one gap is zero.
    """
    e1, e2 = game.eps()
    game.require_nondegenerate()
    total = abs(e1) + abs(e2)
    return MixedStrategy(abs(e2) / total, abs(e1) / total)
