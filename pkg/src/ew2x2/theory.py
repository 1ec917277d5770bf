"""Closed-form guarantees for the dynamic, and the matching counterexamples.

Three kinds of artifacts live here:

* stepwise exponential decay envelopes on the vanishing action
  probabilities (``decay_envelope_report``), valid in the regimes where the
  dynamic converges at an exponential rate; checked in log space so that
  nothing under- or overflows;
* structural constants: the cap on simultaneous-sign-flip events
  (``two_flip_bound``) and the one-dimensional update map for identical
  initializations together with its contraction certificate
  (``contraction_map``);
* explicit constructions: step sizes and initializations that provably
  oscillate forever (``construct_oscillation_identical`` /
  ``construct_oscillation_opposite``), and an initialization for
  single-zero-gap games whose limit is a strictly mixed family point
  (``construct_mixed_limit_init``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .dynamics import Trajectory
from .errors import InvalidParameterError, WrongRegimeError
from .games import Action, MixedStrategy, SignRegime, SymmetricGame, game_from_eps

#: Log-space slack for the decay envelopes (absorbs ulp-level rounding).
ENVELOPE_TOL = 1e-9


def _log_p_theta1(u: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -u)


def _log_p_theta2(u: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, u)


class EnvelopeCheck(NamedTuple):
    name: str
    rate: float  # per-step log decay constant (signed)
    max_excess: float  # max over steps of ln(prob) - ln(envelope)


@dataclass(frozen=True)
class EnvelopeReport:
    target: tuple[Action, Action]
    checks: tuple[EnvelopeCheck, ...]
    ok: bool


def decay_envelope_report(traj: Trajectory, slack: float = ENVELOPE_TOL) -> EnvelopeReport:
    """Verify the stepwise exponential decay envelopes along a trajectory.

    The applicable envelope is selected from the gap signs and the initial
    advantage signs; WrongRegimeError if the run is not in an
    exponential-rate case. Each envelope has the form

        ln p(t) <= (+-) u(1) + eta * (t - 1) * rate,

    evaluated at every recorded step (t = 1 included, where it is trivially
    slack). ``ok`` means no recorded step exceeds the envelope by more than
    ``slack`` in log space.
    """
    game = traj.game
    e1, e2 = game.eps()
    eta = traj.eta
    u10, u20 = float(traj.u1[0]), float(traj.u2[0])
    d10, d20 = float(traj.d1[0]), float(traj.d2[0])
    elapsed = (traj.t - 1).astype(float)
    regime = game.sign_regime()

    def excess(logp: np.ndarray, anchor: float, rate: float) -> float:
        return float(np.max(logp - (anchor + eta * elapsed * rate)))

    checks: list[EnvelopeCheck] = []
    if regime is SignRegime.NEG_NEG:
        k1 = d20 if abs(e1) < abs(e2) else e2
        k2 = d10 if abs(e1) < abs(e2) else e2
        checks.append(EnvelopeCheck("p11", k1, excess(_log_p_theta1(traj.u1), u10, k1)))
        checks.append(EnvelopeCheck("p21", k2, excess(_log_p_theta1(traj.u2), u20, k2)))
        target = (Action.THETA2, Action.THETA2)
    elif regime is SignRegime.POS_POS:
        k1 = d20 if abs(e2) < abs(e1) else e1
        k2 = d10 if abs(e2) < abs(e1) else e1
        checks.append(EnvelopeCheck("p12", -k1, excess(_log_p_theta2(traj.u1), -u10, -k1)))
        checks.append(EnvelopeCheck("p22", -k2, excess(_log_p_theta2(traj.u2), -u20, -k2)))
        target = (Action.THETA1, Action.THETA1)
    elif regime is SignRegime.NEG_POS:
        if d10 < 0.0 < d20:
            checks.append(EnvelopeCheck("p12", -d20, excess(_log_p_theta2(traj.u1), -u10, -d20)))
            checks.append(EnvelopeCheck("p21", d10, excess(_log_p_theta1(traj.u2), u20, d10)))
            target = (Action.THETA1, Action.THETA2)
        elif d20 < 0.0 < d10:
            checks.append(EnvelopeCheck("p11", d20, excess(_log_p_theta1(traj.u1), u10, d20)))
            checks.append(EnvelopeCheck("p22", -d10, excess(_log_p_theta2(traj.u2), -u20, -d10)))
            target = (Action.THETA2, Action.THETA1)
        else:
            raise WrongRegimeError(
                "exponential envelope needs opposite-sign initial advantages here"
            )
    elif regime is SignRegime.POS_NEG:
        if d10 > 0.0 and d20 > 0.0:
            checks.append(EnvelopeCheck("p12", -d20, excess(_log_p_theta2(traj.u1), -u10, -d20)))
            checks.append(EnvelopeCheck("p22", -d10, excess(_log_p_theta2(traj.u2), -u20, -d10)))
            target = (Action.THETA1, Action.THETA1)
        elif d10 < 0.0 and d20 < 0.0:
            checks.append(EnvelopeCheck("p11", d20, excess(_log_p_theta1(traj.u1), u10, d20)))
            checks.append(EnvelopeCheck("p21", d10, excess(_log_p_theta1(traj.u2), u20, d10)))
            target = (Action.THETA2, Action.THETA2)
        else:
            raise WrongRegimeError(
                "exponential envelope needs same-sign initial advantages here"
            )
    elif regime is SignRegime.ZERO_NEG:
        checks.append(EnvelopeCheck("p11", d20, excess(_log_p_theta1(traj.u1), u10, d20)))
        checks.append(EnvelopeCheck("p21", d10, excess(_log_p_theta1(traj.u2), u20, d10)))
        target = (Action.THETA2, Action.THETA2)
    elif regime is SignRegime.POS_ZERO:
        checks.append(EnvelopeCheck("p12", -d20, excess(_log_p_theta2(traj.u1), -u10, -d20)))
        checks.append(EnvelopeCheck("p22", -d10, excess(_log_p_theta2(traj.u2), -u20, -d10)))
        target = (Action.THETA1, Action.THETA1)
    else:
        raise WrongRegimeError(f"no exponential-rate envelope in regime {regime}")

    return EnvelopeReport(
        target=target,
        checks=tuple(checks),
        ok=all(c.max_excess <= slack for c in checks),
    )


def measured_tail_contraction(
    traj: Trajectory, window: int = 64, floor: float = 1e-11
) -> float:
    """Largest |uhat(t+1)| / |uhat(t)| over the resolvable tail of a run.

    Once |uhat| falls within a few hundred ulps of the root coordinate, the
    additive update rounds to a no-op and consecutive offsets repeat
    verbatim; ratios are therefore taken over the last ``window`` recorded
    steps whose offset magnitude is still above ``floor``. Returns 0.0 when
    nothing in the tail is resolvable (the run is pinned to the root).
    """
    h1, _ = traj.uhat()
    mags = np.abs(h1)
    idx = np.nonzero(mags >= floor)[0]
    idx = idx[idx + 1 < len(mags)][-window:]
    ratios = mags[idx + 1] / mags[idx]
    return float(ratios.max()) if len(ratios) else 0.0


class TwoFlipBound(NamedTuple):
    """Closed-form cap on the number of simultaneous sign flips.

    n_max may be negative when the initial separation W1 already exceeds
    2*beta, in which case no simultaneous flip can occur at all.
    """

    n_max: float
    beta: float
    big_c: float


def two_flip_bound(game: SymmetricGame, eta: float, w1: float) -> TwoFlipBound:
    """Bound the count of two-sided sign flips for eps1 < 0 < eps2 runs.

    beta caps |uhat| at any flipping step, and each flip multiplies the
    (nondecreasing) separation W by at least 1 + C, giving
    n <= ln(2*beta / W1) / ln(1 + C).
    """
    e1, e2 = game.eps()
    if not (e1 < 0.0 < e2):
        raise WrongRegimeError(f"two-flip bound requires eps1 < 0 < eps2, got ({e1}, {e2})")
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    if not w1 > 0.0:
        raise InvalidParameterError(f"initial separation W1 must be positive, got {w1}")
    beta = eta * max(-e1, e2)
    rstar = abs(e2) / abs(e1)
    big_c = eta * (e2 - e1) * min(
        rstar * math.exp(-beta) / (1.0 + rstar * math.exp(-beta)) ** 2,
        rstar * math.exp(beta) / (1.0 + rstar * math.exp(beta)) ** 2,
    )
    n_max = math.log(2.0 * beta / w1) / math.log1p(big_c)
    return TwoFlipBound(n_max=n_max, beta=beta, big_c=big_c)


@dataclass(frozen=True)
class ContractionMap:
    """The identical-initialization update u -> T(u) and its certificate.

    With both players at the same log-ratio offset u from the advantage
    root, one step of the dynamic is

        T(u) = u + eta * (eps1 * r* e^u + eps2) / (1 + r* e^u),

    whose derivative is 1 - eta * Gamma * z / (1 + z)^2 at z = r* e^u with
    Gamma = |eps1| + |eps2|. Since z/(1+z)^2 <= 1/4, the map contracts
    toward the fixed point T(0) = 0 exactly when eta * Gamma < 8.
    """

    game: SymmetricGame
    eta: float

    def __post_init__(self):
        e1, e2 = self.game.eps()
        if not (e1 < 0.0 < e2):
            raise WrongRegimeError(
                f"identical-init map requires eps1 < 0 < eps2, got ({e1}, {e2})"
            )
        if self.eta <= 0.0:
            raise InvalidParameterError(f"step size must be positive, got {self.eta}")

    @property
    def gamma(self) -> float:
        e1, e2 = self.game.eps()
        return abs(e1) + abs(e2)

    @property
    def rstar(self) -> float:
        e1, e2 = self.game.eps()
        return abs(e2) / abs(e1)

    @property
    def contraction(self) -> bool:
        return self.eta * self.gamma < 8.0

    @property
    def lipschitz_global(self) -> float:
        """sup over all u of |T'(u)|; the boundary limit pins it at >= 1."""
        return max(abs(1.0 - self.eta * self.gamma / 4.0), 1.0)

    def __call__(self, u: float) -> float:
        e1, e2 = self.game.eps()
        z = self.rstar * math.exp(u)
        return u + self.eta * (e1 * z + e2) / (1.0 + z)

    def derivative(self, u: float) -> float:
        z = self.rstar * math.exp(u)
        return 1.0 - self.eta * self.gamma * z / (1.0 + z) ** 2

    def lipschitz(self, u_max: float) -> float:
        """sup of |T'| over the reachable band [-u_max, u_max].

        Strictly below 1 on any compact band whenever eta * Gamma < 8.
        """
        if u_max < 0.0:
            raise InvalidParameterError(f"u_max must be nonnegative, got {u_max}")
        q = lambda z: z / (1.0 + z) ** 2
        z_lo = self.rstar * math.exp(-u_max)
        z_hi = self.rstar * math.exp(u_max)
        q_min = min(q(z_lo), q(z_hi))
        q_max = 0.25 if z_lo <= 1.0 <= z_hi else max(q(z_lo), q(z_hi))
        coeff = self.eta * self.gamma
        return max(abs(1.0 - coeff * q_min), abs(1.0 - coeff * q_max))


def contraction_map(game: SymmetricGame, eta: float) -> ContractionMap:
    return ContractionMap(game=game, eta=eta)


class ConstructedRun(NamedTuple):
    game: SymmetricGame
    init: tuple[MixedStrategy, MixedStrategy]
    eta: float


#: Below this the cotangent blows up and the construction loses meaning.
MIN_OSCILLATION_OFFSET = 1e-8


def _coth_half(a: float) -> float:
    return 1.0 / math.tanh(a / 2.0)


def construct_oscillation_identical(a: float) -> ConstructedRun:
    """A game and identical initialization locked on a period-2 orbit.

    Gaps (-g, +g) with g = 2a coth(a/2), step size 1, both players started
    at log-ratio a. One step maps a to -a and back; the required step-size
    bound is violated by construction since a coth(a/2) > 2 for all a > 0.
    """
    if not a > 0.0 or a < MIN_OSCILLATION_OFFSET:
        raise InvalidParameterError(f"offset must be at least {MIN_OSCILLATION_OFFSET}, got {a}")
    g = 2.0 * a * _coth_half(a)
    s = MixedStrategy.from_log_ratio(a)
    return ConstructedRun(game=game_from_eps(-g, g), init=(s, s), eta=1.0)


def construct_oscillation_opposite(a: float) -> ConstructedRun:
    """A game and equal-and-opposite initialization on a period-2 orbit.

    Gaps (+g, -g) with g = 2a coth(a/2), step size 1, players started at
    log-ratios a and -a. The mirror relation u2 = -u1 is preserved exactly
    (bit-for-bit) by the update, and each step negates the common offset.
    """
    if not a > 0.0 or a < MIN_OSCILLATION_OFFSET:
        raise InvalidParameterError(f"offset must be at least {MIN_OSCILLATION_OFFSET}, got {a}")
    g = 2.0 * a * _coth_half(a)
    return ConstructedRun(
        game=game_from_eps(g, -g),
        init=(MixedStrategy.from_log_ratio(a), MixedStrategy.from_log_ratio(-a)),
        eta=1.0,
    )


def mixed_limit_ratio_bound(game: SymmetricGame, r_j_init: float, cap: float, eta: float) -> float:
    """Initial ratio for the diverging player that keeps the other bounded.

    For eps1 = 0, eps2 > 0: if player i starts at or above this ratio,
    player j's ratio never exceeds ``cap`` while r_i grows at least like
    exp(eta * eps2 * t / (1 + cap)).
    """
    e1, e2 = game.eps()
    if e1 != 0.0 or not e2 > 0.0:
        raise WrongRegimeError(f"construction requires eps1 = 0 < eps2, got ({e1}, {e2})")
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    if not (0.0 < r_j_init < cap):
        raise InvalidParameterError(
            f"need 0 < r_j_init < cap, got r_j_init={r_j_init}, cap={cap}"
        )
    denom = (1.0 - math.exp(-eta * e2 / (1.0 + cap))) * math.log(cap / r_j_init)
    return eta * e2 / denom


def construct_mixed_limit_init(
    game: SymmetricGame, r_j_init: float, cap: float, eta: float
) -> tuple[MixedStrategy, MixedStrategy]:
    """Initialization whose limit is a strictly mixed family point.

    Player 1 starts exactly at the closed-form ratio bound (safety factor
    1.0) and diverges toward theta1; player 2 starts at ``r_j_init`` and its
    ratio stays below ``cap`` forever.
    """
    r_i = mixed_limit_ratio_bound(game, r_j_init, cap, eta)
    return (
        MixedStrategy.from_log_ratio(math.log(r_i)),
        MixedStrategy.from_log_ratio(math.log(r_j_init)),
    )


@dataclass(frozen=True)
class OneSidedDivergenceReport:
    """Stepwise check of the bounded-ratio / divergence guarantees."""

    max_u_bounded: float  # max over steps of the bounded player's log-ratio
    cap_log: float  # ln(cap) it must stay under
    min_envelope_margin: float  # min over steps of u_i - envelope
    ok: bool


def one_sided_divergence_report(
    traj: Trajectory, cap: float, slack: float = ENVELOPE_TOL
) -> OneSidedDivergenceReport:
    """Check r_j <= cap at every step and r_i above its growth envelope.

    Player 1 is the diverging one (as produced by
    ``construct_mixed_limit_init``); the envelope is
    u_1(t) >= u_1(1) + eta * eps2 * (t - 1) / (1 + cap).
    """
    e1, e2 = traj.game.eps()
    if e1 != 0.0 or not e2 > 0.0:
        raise WrongRegimeError(f"report requires eps1 = 0 < eps2, got ({e1}, {e2})")
    elapsed = (traj.t - 1).astype(float)
    envelope = float(traj.u1[0]) + traj.eta * e2 * elapsed / (1.0 + cap)
    margin = float(np.min(traj.u1 - envelope))
    max_u2 = float(np.max(traj.u2))
    cap_log = math.log(cap)
    return OneSidedDivergenceReport(
        max_u_bounded=max_u2,
        cap_log=cap_log,
        min_envelope_margin=margin,
        ok=(max_u2 <= cap_log + slack) and (margin >= -slack),
    )
