"""Discrete-time exponential-weights dynamic on a 2x2 symmetric game.

Both players start from mixed strategies and simultaneously reweight each
action by exp(eta * expected payoff of that action against the opponent's
current mixture). In ratio coordinates r_i = p_{i,1}/p_{i,2} the update is

    r_i(t+1) = r_i(t) * exp(eta * D_j(t)),      j = the other player,

where D_j = theta1_advantage at player j's mixture. The canonical state here
is u_i = ln r_i: the update is then a plain addition, which survives
convergence to pure strategies where the probabilities themselves underflow.
Probabilities are a view, reconstructed through the stable logistic, and are
only recomputed when u actually changes so that zero-advantage states are
bit-exact fixed points.

For opposite-sign gap regimes the shifted coordinate uhat_i = ln(r_i / r*)
(r* the advantage root) is the natural one: its sign pattern classifies each
transition as a 0-, 1- or 2-sign-flip, and the potentials

    W_t = uhat_j - uhat_i   (players ordered by initial ratio)
    V_t = |uhat_1| + |uhat_2|

are tracked unthinned alongside the trajectory.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    DegenerateInitError,
    InvalidParameterError,
    NonFiniteStateError,
    WrongRegimeError,
)
from .games import (
    Action,
    MixedStrategy,
    SymmetricGame,
    symmetric_mixed_profile,
)
from . import equilibria

DEFAULT_HORIZON = 1_000_000


@dataclass(frozen=True)
class DetectorTolerances:
    """Thresholds for calling a trajectory converged/oscillating.

    u_pure: |u| beyond which a player counts as pure (p within ~1e-20).
    tol_mix: |uhat| band certifying the strictly mixed rest point.
    tol_osc: residual band for a period-2 orbit.
    window: number of trailing steps every certificate must hold over.
    u_cap: hard |u| cap; beyond it exp() is meaningless and the pure
        verdict is forced.
    """

    u_pure: float = 46.0
    tol_mix: float = 1e-8
    tol_osc: float = 1e-9
    window: int = 64
    u_cap: float = 1e6


DEFAULT_TOLERANCES = DetectorTolerances()


class FlipKind(IntEnum):
    ZERO = 0
    ONE = 1
    TWO = 2


class FlipEvent(NamedTuple):
    t: int  # index of the state the transition departed from
    kind: FlipKind


class Potentials(NamedTuple):
    w: np.ndarray
    v: np.ndarray


class VerdictKind(Enum):
    PURE_NE = "PureNE"
    STRICT_MIXED_NE = "StrictMixedNE"
    MIXED_FAMILY_NE = "MixedFamilyNE"
    PERIOD_TWO = "PeriodTwoOscillation"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class LimitVerdict:
    """What the tail of a trajectory settled into, plus a residual diagnostic."""

    kind: VerdictKind
    pair: Optional[tuple[Action, Action]] = None
    profile: Optional[tuple[MixedStrategy, MixedStrategy]] = None
    residual: float = math.nan

    def __str__(self) -> str:
        if self.kind is VerdictKind.PURE_NE:
            return f"PureNE({self.pair[0]},{self.pair[1]})"
        if self.kind is VerdictKind.STRICT_MIXED_NE:
            s = self.profile[0]
            return f"StrictMixedNE(({s.p1:g},{s.p2:g}))"
        if self.kind is VerdictKind.MIXED_FAMILY_NE:
            s1, s2 = self.profile
            return f"MixedFamilyNE(({s1.p1:g},{s1.p2:g}),({s2.p1:g},{s2.p2:g}))"
        return self.kind.value


UNDECIDED = LimitVerdict(VerdictKind.UNDECIDED)


def _stable_p(u: float) -> tuple[float, float]:
    """(p1, p2) of the strategy with ln(p1/p2) = u, overflow-free."""
    if u >= 0.0:
        z = math.exp(-u)
        s = 1.0 + z
        return 1.0 / s, z / s
    z = math.exp(u)
    s = 1.0 + z
    return z / s, 1.0 / s


@dataclass(frozen=True)
class DynState:
    """One time step of the coupled system.

    u_i = ln(p_{i,1}/p_{i,2}) is canonical; the strategies are the matching
    probability view. For opposite-sign gap games the shifted coordinate is
    available through ``uhat``.
    """

    u1: float
    u2: float
    p1: MixedStrategy
    p2: MixedStrategy
    t: int = 1

    @classmethod
    def initial(cls, s1: MixedStrategy, s2: MixedStrategy) -> "DynState":
        if s1.is_pure() or s2.is_pure():
            raise DegenerateInitError("pure-strategy initializations never move; refusing")
        return cls(u1=s1.log_ratio(), u2=s2.log_ratio(), p1=s1, p2=s2, t=1)

    def uhat(self, game: SymmetricGame) -> tuple[float, float]:
        shift = log_ratio_root(game)
        return (self.u1 - shift, self.u2 - shift)


def log_ratio_root(game: SymmetricGame) -> float:
    """ln(r*) for opposite-sign gap games; raises WrongRegimeError otherwise."""
    e1, e2 = game.eps()
    if not (e1 * e2 < 0.0):
        raise WrongRegimeError(f"no interior advantage root for gaps ({e1}, {e2})")
    return math.log(abs(e2)) - math.log(abs(e1))


def ew_step(game: SymmetricGame, state: DynState, eta: float) -> DynState:
    """One simultaneous exponential-weights update of both players.

    A zero advantage leaves the corresponding opponent coordinate (and its
    probability view) bitwise unchanged.
    """
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    game.require_nondegenerate()
    e1, e2 = game.eps()
    d1 = state.p1.p1 * e1 + state.p1.p2 * e2
    d2 = state.p2.p1 * e1 + state.p2.p2 * e2

    u1, p1 = state.u1, state.p1
    u2, p2 = state.u2, state.p2
    if d2 != 0.0:
        u1 = state.u1 + eta * d2
        p1 = MixedStrategy(*_stable_p(u1))
    if d1 != 0.0:
        u2 = state.u2 + eta * d1
        p2 = MixedStrategy(*_stable_p(u2))
    if abs(u1) > DEFAULT_TOLERANCES.u_cap or abs(u2) > DEFAULT_TOLERANCES.u_cap:
        raise NonFiniteStateError(f"log-ratio state left +-{DEFAULT_TOLERANCES.u_cap:g}")
    return DynState(u1=u1, u2=u2, p1=p1, p2=p2, t=state.t + 1)


@dataclass
class Trajectory:
    """Recorded run of the dynamic.

    ``t`` holds the recorded step indices (1-based, state 1 = the
    initialization); ``u1/u2/d1/d2`` are aligned with it. Flip events and the
    W/V potentials are recorded unthinned for opposite-sign gap games and are
    None/empty otherwise. ``steps`` is the total number of executed steps,
    which equals t[-1].
    """

    game: SymmetricGame
    eta: float
    init: tuple[MixedStrategy, MixedStrategy]
    t: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    verdict: LimitVerdict
    steps: int
    events: list[FlipEvent]
    flip_counts: Optional[np.ndarray]  # per transition t -> t+1, unthinned
    w: Optional[np.ndarray]  # potential W_t per step, unthinned
    v: Optional[np.ndarray]  # potential V_t per step, unthinned
    thinned: bool = False

    @property
    def states(self) -> list[DynState]:
        out = []
        for k in range(len(self.t)):
            out.append(
                DynState(
                    u1=float(self.u1[k]),
                    u2=float(self.u2[k]),
                    p1=MixedStrategy(*_stable_p(float(self.u1[k]))),
                    p2=MixedStrategy(*_stable_p(float(self.u2[k]))),
                    t=int(self.t[k]),
                )
            )
        return out

    def uhat(self) -> tuple[np.ndarray, np.ndarray]:
        shift = log_ratio_root(self.game)
        return (self.u1 - shift, self.u2 - shift)

    def two_flip_count(self) -> int:
        return sum(1 for ev in self.events if ev.kind is FlipKind.TWO)

    def one_flip_count(self) -> int:
        return sum(1 for ev in self.events if ev.kind is FlipKind.ONE)


def _uhat_sign(x: float) -> int:
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    return 0


def simulate(
    game: SymmetricGame,
    init: tuple[MixedStrategy, MixedStrategy],
    eta: float,
    horizon: int = DEFAULT_HORIZON,
    *,
    tolerances: DetectorTolerances = DEFAULT_TOLERANCES,
    allow_degenerate_init: bool = False,
    thinned: bool = False,
    early_stop: bool = True,
    check_every: int = 16,
) -> Trajectory:
    """Run the dynamic and attach a limit verdict.

    States are recorded every step (or, with ``thinned=True``, every step up
    to t=1000 and every 10th after, plus the final state). The verdict is
    assigned by ``detect_limit`` on the trailing window; Undecided at the
    horizon is a legal outcome. Initializations violating the usual
    non-degeneracy assumptions (a zero advantage at t=1) are rejected unless
    ``allow_degenerate_init`` is set, in which case the documented
    fixed-point behavior plays out.
    """
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    game.require_nondegenerate()
    e1, e2 = game.eps()
    s1, s2 = init
    if s1.is_pure() or s2.is_pure():
        raise DegenerateInitError("pure-strategy initializations never move; refusing")

    u1 = s1.log_ratio()
    u2 = s2.log_ratio()
    p11, p12 = s1.p1, s1.p2
    p21, p22 = s2.p1, s2.p2
    d1 = p11 * e1 + p12 * e2
    d2 = p21 * e1 + p22 * e2
    if (d1 == 0.0 or d2 == 0.0) and not allow_degenerate_init:
        raise DegenerateInitError(
            "an advantage functional is exactly zero at t=1; pass "
            "allow_degenerate_init=True to simulate the fixed-point behavior"
        )

    mixed = e1 * e2 < 0.0
    shift = (math.log(abs(e2)) - math.log(abs(e1))) if mixed else 0.0
    w_sign = 1.0 if u1 >= u2 else -1.0  # W = u_j - u_i with j the larger start

    tol = tolerances
    window = tol.window
    tail1: deque[float] = deque(maxlen=window)
    tail2: deque[float] = deque(maxlen=window)

    rec_t: list[int] = []
    rec_u1: list[float] = []
    rec_u2: list[float] = []
    rec_d1: list[float] = []
    rec_d2: list[float] = []
    events: list[FlipEvent] = []
    flip_counts: list[int] = []
    w_pot: list[float] = []
    v_pot: list[float] = []

    if mixed:
        sign1 = _uhat_sign(u1 - shift)
        sign2 = _uhat_sign(u2 - shift)

    exp = math.exp
    u_cap = tol.u_cap
    verdict = UNDECIDED
    t = 1
    while True:
        d1 = p11 * e1 + p12 * e2
        d2 = p21 * e1 + p22 * e2
        if not thinned or t <= 1000 or t % 10 == 0 or t == horizon:
            rec_t.append(t)
            rec_u1.append(u1)
            rec_u2.append(u2)
            rec_d1.append(d1)
            rec_d2.append(d2)
        if mixed:
            w_pot.append(w_sign * (u1 - u2))
            v_pot.append(abs(u1 - shift) + abs(u2 - shift))
        tail1.append(u1)
        tail2.append(u2)

        if len(tail1) == window and (t % check_every == 0 or t == horizon):
            verdict = _detect_from_window(
                game, np.asarray(tail1), np.asarray(tail2), tol
            )
            if verdict.kind is not VerdictKind.UNDECIDED and early_stop:
                break
        if t == horizon:
            break

        # Simultaneous update; zero advantages leave coordinates bit-exact.
        nu1 = u1 + eta * d2 if d2 != 0.0 else u1
        nu2 = u2 + eta * d1 if d1 != 0.0 else u2
        if abs(nu1) > u_cap or abs(nu2) > u_cap:
            # The verdict is forced long before exp() degrades.
            verdict = _forced_pure_verdict(game, nu1, nu2, tol)
            break
        if d2 != 0.0:
            u1 = nu1
            if u1 >= 0.0:
                z = exp(-u1)
                s = 1.0 + z
                p11 = 1.0 / s
                p12 = z / s
            else:
                z = exp(u1)
                s = 1.0 + z
                p11 = z / s
                p12 = 1.0 / s
        if d1 != 0.0:
            u2 = nu2
            if u2 >= 0.0:
                z = exp(-u2)
                s = 1.0 + z
                p21 = 1.0 / s
                p22 = z / s
            else:
                z = exp(u2)
                s = 1.0 + z
                p21 = z / s
                p22 = 1.0 / s
        if mixed:
            new1 = _uhat_sign(u1 - shift)
            new2 = _uhat_sign(u2 - shift)
            changed = (new1 != sign1) + (new2 != sign2)
            if (new1 == 0) != (new2 == 0):
                changed = 1  # exactly one player landed on the root
            flip_counts.append(changed)
            if changed:
                events.append(FlipEvent(t, FlipKind(changed)))
            sign1, sign2 = new1, new2
        t += 1

    if rec_t[-1] != t:  # thinned runs: always keep the stopping state
        rec_t.append(t)
        rec_u1.append(u1)
        rec_u2.append(u2)
        rec_d1.append(p11 * e1 + p12 * e2)
        rec_d2.append(p21 * e1 + p22 * e2)

    return Trajectory(
        game=game,
        eta=eta,
        init=(s1, s2),
        t=np.asarray(rec_t, dtype=np.int64),
        u1=np.asarray(rec_u1),
        u2=np.asarray(rec_u2),
        d1=np.asarray(rec_d1),
        d2=np.asarray(rec_d2),
        verdict=verdict,
        steps=t,
        events=events,
        flip_counts=np.asarray(flip_counts, dtype=np.uint8) if mixed else None,
        w=np.asarray(w_pot) if mixed else None,
        v=np.asarray(v_pot) if mixed else None,
        thinned=thinned,
    )


def _forced_pure_verdict(
    game: SymmetricGame, u1: float, u2: float, tol: DetectorTolerances
) -> LimitVerdict:
    pair = (
        Action.THETA1 if u1 > 0 else Action.THETA2,
        Action.THETA1 if u2 > 0 else Action.THETA2,
    )
    return LimitVerdict(VerdictKind.PURE_NE, pair=pair, residual=0.0)


def detect_limit(
    game: SymmetricGame,
    u1_tail: np.ndarray,
    u2_tail: np.ndarray,
    tolerances: DetectorTolerances = DEFAULT_TOLERANCES,
) -> LimitVerdict:
    """Classify the tail of a trajectory.

    Expects at least ``tolerances.window`` consecutive per-step log-ratio
    pairs (most recent last); only the trailing window is inspected.

    The certificates, tried in order:

    * pure: both |u| beyond u_pure, the implied pair is a pure equilibrium
      of the game, and both advantage signs are stable and outward over the
      window;
    * strictly mixed: both |uhat| inside tol_mix over the whole window
      (opposite-sign gap games only);
    * mixed family: one player pure toward the pinned action of an
      equilibrium family while the other's coordinate has settled to a
      finite constant (single-zero-gap games only);
    * period two: every second difference inside tol_osc while single-step
      movement stays above 10 * tol_osc;
    * otherwise Undecided.
    """
    u1_tail = np.asarray(u1_tail, dtype=float)
    u2_tail = np.asarray(u2_tail, dtype=float)
    if len(u1_tail) < tolerances.window or len(u2_tail) < tolerances.window:
        raise InvalidParameterError(
            f"need at least {tolerances.window} trailing states, got {len(u1_tail)}"
        )
    return _detect_from_window(
        game, u1_tail[-tolerances.window :], u2_tail[-tolerances.window :], tolerances
    )


def _pure_side(u_last: float, u_pure: float) -> Optional[Action]:
    if u_last >= u_pure:
        return Action.THETA1
    if u_last <= -u_pure:
        return Action.THETA2
    return None


def _detect_from_window(
    game: SymmetricGame, w1: np.ndarray, w2: np.ndarray, tol: DetectorTolerances
) -> LimitVerdict:
    e1, e2 = game.eps()
    landscape = equilibria.nash_landscape(game)

    side1 = _pure_side(w1[-1], tol.u_pure)
    side2 = _pure_side(w2[-1], tol.u_pure)
    d1 = _advantage_array(e1, e2, w1)
    d2 = _advantage_array(e1, e2, w2)
    if side1 is not None and side2 is not None:
        pair = (side1, side2)
        outward1 = np.all(d2 >= 0.0) if side1 is Action.THETA1 else np.all(d2 <= 0.0)
        outward2 = np.all(d1 >= 0.0) if side2 is Action.THETA1 else np.all(d1 <= 0.0)
        stable = _constant_sign(d1) and _constant_sign(d2)
        if pair in landscape.pure and outward1 and outward2 and stable:
            residual = max(_off_mass(w1[-1]), _off_mass(w2[-1]))
            return LimitVerdict(VerdictKind.PURE_NE, pair=pair, residual=residual)

    if e1 * e2 < 0.0:
        shift = log_ratio_root(game)
        h1 = np.abs(w1 - shift)
        h2 = np.abs(w2 - shift)
        resid = max(h1.max(), h2.max())
        if resid < tol.tol_mix:
            p_se = symmetric_mixed_profile(game)
            return LimitVerdict(
                VerdictKind.STRICT_MIXED_NE, profile=(p_se, p_se), residual=resid
            )

    if landscape.mixed_families:
        verdict = _detect_family(landscape, w1, w2, side1, side2, tol)
        if verdict is not None:
            return verdict

    move = np.maximum(np.abs(np.diff(w1)), np.abs(np.diff(w2)))
    resid2 = max(
        np.abs(w1[2:] - w1[:-2]).max(initial=0.0),
        np.abs(w2[2:] - w2[:-2]).max(initial=0.0),
    )
    if resid2 < tol.tol_osc and np.all(move > 10.0 * tol.tol_osc):
        return LimitVerdict(VerdictKind.PERIOD_TWO, residual=resid2)

    return LimitVerdict(VerdictKind.UNDECIDED, residual=float(move.max(initial=0.0)))


def _detect_family(
    landscape: equilibria.NashSet,
    w1: np.ndarray,
    w2: np.ndarray,
    side1: Optional[Action],
    side2: Optional[Action],
    tol: DetectorTolerances,
) -> Optional[LimitVerdict]:
    pinned = landscape.mixed_families[0].pinned_action
    for diverged, partner, side in ((w1, w2, side1), (w2, w1, side2)):
        if side is not pinned:
            continue
        drift = float(partner.max() - partner.min())
        if drift < tol.tol_mix and abs(partner[-1]) < tol.u_pure:
            pure = MixedStrategy.from_p1(1.0 if pinned is Action.THETA1 else 0.0)
            free = MixedStrategy(*_stable_p(float(partner[-1])))
            profile = (pure, free) if diverged is w1 else (free, pure)
            return LimitVerdict(
                VerdictKind.MIXED_FAMILY_NE, profile=profile, residual=drift
            )
    return None


def _advantage_array(e1: float, e2: float, u: np.ndarray) -> np.ndarray:
    p1 = np.empty_like(u)
    p2 = np.empty_like(u)
    pos = u >= 0.0
    z = np.exp(-u[pos])
    p1[pos] = 1.0 / (1.0 + z)
    p2[pos] = z / (1.0 + z)
    z = np.exp(u[~pos])
    p1[~pos] = z / (1.0 + z)
    p2[~pos] = 1.0 / (1.0 + z)
    return p1 * e1 + p2 * e2


def _constant_sign(d: np.ndarray) -> bool:
    return bool(np.all(d > 0.0) or np.all(d < 0.0) or np.all(d == 0.0))


def _off_mass(u: float) -> float:
    """Probability mass off the pure action implied by a large |u|."""
    p1, p2 = _stable_p(u)
    return p2 if u > 0 else p1


def flip_events(traj: Trajectory, game: SymmetricGame) -> tuple[list[FlipEvent], Potentials]:
    """Sign-flip events and the W/V potentials of a recorded trajectory.

    Only defined for opposite-sign gap games. Prefers the unthinned
    bookkeeping recorded by ``simulate``; falls back to reclassifying the
    stored states, which requires them to be consecutive.
    """
    e1, e2 = game.eps()
    if not (e1 * e2 < 0.0):
        raise WrongRegimeError(
            f"sign flips are defined for opposite-sign gaps, got ({e1}, {e2})"
        )
    if traj.w is not None and traj.v is not None:
        return traj.events, Potentials(w=traj.w, v=traj.v)

    if np.any(np.diff(traj.t) != 1):
        raise InvalidParameterError("recorded states are not consecutive; cannot reclassify")
    shift = log_ratio_root(game)
    h1 = traj.u1 - shift
    h2 = traj.u2 - shift
    w_sign = 1.0 if traj.u1[0] >= traj.u2[0] else -1.0
    pot = Potentials(w=w_sign * (traj.u1 - traj.u2), v=np.abs(h1) + np.abs(h2))
    events: list[FlipEvent] = []
    s1 = np.sign(h1)
    s2 = np.sign(h2)
    for k in range(len(h1) - 1):
        changed = int(s1[k + 1] != s1[k]) + int(s2[k + 1] != s2[k])
        if (s1[k + 1] == 0) != (s2[k + 1] == 0):
            changed = 1
        if changed:
            events.append(FlipEvent(int(traj.t[k]), FlipKind(changed)))
    return events, pot
