"""Mortgage competition between two banks as a 2x2 symmetric game generator.

Each bank posts a credit-score threshold and an interest rate. A customer
with (normalized) score y repays with probability y, so a bank lending at
rate gamma books an expected profit of (2 + gamma) * y - 1 per customer.
Customers go to the bank whose threshold they clear; when both qualify they
pick the lower rate (ties split evenly). All payoffs therefore reduce to the
per-band expected profit

    band_profit(gamma, lo, hi) = integral over [lo, hi] of
                                 ((2 + gamma) y - 1) * density(y) dy,

evaluated in closed form for the two supported score densities (truncated
Gaussian and piecewise uniform).

With two thresholds and two rates there are four actions per bank,
    0: (tau_l, gamma_l)   1: (tau_l, gamma_h)
    2: (tau_h, gamma_l)   3: (tau_h, gamma_h),
of which 0 and 3 are dominated when the thresholds bracket the break-even
scores (tau_l >= 1/(2+gamma_h) and tau_h <= 1/(2+gamma_l)); eliminating them
leaves a 2x2 symmetric game on the actions (tau_l, gamma_h) / (tau_h,
gamma_l). The four-action exponential-weights run and the reduced 2x2
dynamic can be compared directly.

Two threshold rules are offered: the "appendix" rule tau_l = 1/(1+gamma_h),
tau_h = 1/(1+gamma_l), and the "rational" rule tau_l = 1/(2+gamma_h),
tau_h = 1/(2+gamma_l) placing each threshold at the break-even score of the
opposite rate. Only the rational rule brackets the break-even scores, so it
is the one under which the dominance eliminations actually hold; the canned
demonstration configs use it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dynamics import LimitVerdict, Trajectory, simulate
from .errors import ConfigError, InvalidParameterError, InvalidRangeError
from .games import MixedStrategy, SymmetricGame

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _norm_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


class CreditDistribution:
    """A probability density for customer scores on [0, 1]."""

    def mass(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def first_moment(self, lo: float, hi: float) -> float:
        raise NotImplementedError

    def pdf(self, y: float) -> float:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class TruncatedGaussian(CreditDistribution):
    """Normal(mu, sigma) conditioned on [0, 1]."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)) or self.sigma <= 0.0:
            raise InvalidParameterError(f"bad truncated-Gaussian parameters ({self.mu}, {self.sigma})")
        if self._z() < 1e-12:
            raise InvalidParameterError("essentially no Gaussian mass falls inside [0, 1]")

    def _z(self) -> float:
        return _norm_cdf((1.0 - self.mu) / self.sigma) - _norm_cdf((0.0 - self.mu) / self.sigma)

    def mass(self, lo: float, hi: float) -> float:
        a = (lo - self.mu) / self.sigma
        b = (hi - self.mu) / self.sigma
        return (_norm_cdf(b) - _norm_cdf(a)) / self._z()

    def first_moment(self, lo: float, hi: float) -> float:
        a = (lo - self.mu) / self.sigma
        b = (hi - self.mu) / self.sigma
        m = (_norm_cdf(b) - _norm_cdf(a)) / self._z()
        return self.mu * m + self.sigma * (_norm_pdf(a) - _norm_pdf(b)) / self._z()

    def pdf(self, y: float) -> float:
        if y < 0.0 or y > 1.0:
            return 0.0
        return _norm_pdf((y - self.mu) / self.sigma) / (self.sigma * self._z())

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            draw = rng.normal(self.mu, self.sigma, size=max(n - filled, 1024))
            keep = draw[(draw >= 0.0) & (draw <= 1.0)]
            take = min(len(keep), n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out


@dataclass(frozen=True)
class PiecewiseUniform(CreditDistribution):
    """Mass beta1 uniform on [0, tau_l], beta2 on (tau_l, tau_h), the rest
    on [tau_h, 1]."""

    beta1: float
    beta2: float
    tau_l: float
    tau_h: float

    def __post_init__(self):
        if self.beta1 < 0.0 or self.beta2 < 0.0 or self.beta1 + self.beta2 > 1.0:
            raise InvalidParameterError(
                f"segment masses must be nonnegative and sum to at most 1, got "
                f"({self.beta1}, {self.beta2})"
            )
        if not (0.0 < self.tau_l < self.tau_h < 1.0):
            raise InvalidParameterError(
                f"segment bounds must satisfy 0 < tau_l < tau_h < 1, got "
                f"({self.tau_l}, {self.tau_h})"
            )

    def _segments(self) -> tuple[tuple[float, float, float], ...]:
        beta3 = 1.0 - self.beta1 - self.beta2
        return (
            (0.0, self.tau_l, self.beta1 / self.tau_l),
            (self.tau_l, self.tau_h, self.beta2 / (self.tau_h - self.tau_l)),
            (self.tau_h, 1.0, beta3 / (1.0 - self.tau_h)),
        )

    def mass(self, lo: float, hi: float) -> float:
        total = 0.0
        for a, b, dens in self._segments():
            s, e = max(lo, a), min(hi, b)
            if e > s:
                total += dens * (e - s)
        return total

    def first_moment(self, lo: float, hi: float) -> float:
        total = 0.0
        for a, b, dens in self._segments():
            s, e = max(lo, a), min(hi, b)
            if e > s:
                total += dens * 0.5 * (e * e - s * s)
        return total

    def pdf(self, y: float) -> float:
        for a, b, dens in self._segments():
            if a <= y <= b:
                return dens
        return 0.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        segs = self._segments()
        weights = np.array([self.beta1, self.beta2, 1.0 - self.beta1 - self.beta2])
        counts = rng.multinomial(n, weights / weights.sum())
        parts = [
            rng.uniform(segs[k][0], segs[k][1], size=counts[k]) for k in range(3)
        ]
        out = np.concatenate(parts)
        rng.shuffle(out)
        return out


def band_profit(dist: CreditDistribution, gamma: float, tau_a: float, tau_b: float) -> float:
    """Expected lender profit over the score band [tau_a, tau_b] at rate gamma."""
    if tau_a > tau_b:
        raise InvalidRangeError(f"band is reversed: [{tau_a}, {tau_b}]")
    if tau_a < 0.0 or tau_b > 1.0:
        raise InvalidRangeError(f"band [{tau_a}, {tau_b}] leaves the score range [0, 1]")
    return (2.0 + gamma) * dist.first_moment(tau_a, tau_b) - dist.mass(tau_a, tau_b)


@dataclass(frozen=True)
class BankParams:
    """Interest rates and score thresholds for the two-bank game."""

    gamma_l: float
    gamma_h: float
    tau_l: float
    tau_h: float

    def __post_init__(self):
        if not (0.0 < self.gamma_l < self.gamma_h < 1.0):
            raise InvalidParameterError(
                f"need 0 < gamma_l < gamma_h < 1, got ({self.gamma_l}, {self.gamma_h})"
            )
        if not (0.0 <= self.tau_l < self.tau_h <= 1.0):
            raise InvalidParameterError(
                f"need 0 <= tau_l < tau_h <= 1, got ({self.tau_l}, {self.tau_h})"
            )

    @classmethod
    def from_rates(
        cls, gamma_l: float, gamma_h: float, rule: str = "appendix"
    ) -> "BankParams":
        """Derive thresholds from the rates.

        rule="appendix" (default): tau_l = 1/(1+gamma_h), tau_h = 1/(1+gamma_l).
        rule="rational": tau_l = 1/(2+gamma_h), tau_h = 1/(2+gamma_l), i.e.
        each threshold sits at the break-even score of the opposite rate,
        which is what makes the low/low and high/high actions dominated.
        """
        if rule == "appendix":
            return cls(gamma_l, gamma_h, 1.0 / (1.0 + gamma_h), 1.0 / (1.0 + gamma_l))
        if rule == "rational":
            return cls(gamma_l, gamma_h, 1.0 / (2.0 + gamma_h), 1.0 / (2.0 + gamma_l))
        raise InvalidParameterError(f"unknown threshold rule {rule!r}")

    def actions(self) -> tuple[tuple[float, float], ...]:
        """The four (threshold, rate) actions in index order."""
        return (
            (self.tau_l, self.gamma_l),
            (self.tau_l, self.gamma_h),
            (self.tau_h, self.gamma_l),
            (self.tau_h, self.gamma_h),
        )


ACTION_LABELS = ("(tau_l,gamma_l)", "(tau_l,gamma_h)", "(tau_h,gamma_l)", "(tau_h,gamma_h)")

#: Indices of the actions that survive dominance elimination.
SURVIVORS = (1, 2)
#: Indices of the dominated actions.
DOMINATED = (0, 3)


def utility_matrix(dist: CreditDistribution, params: BankParams) -> np.ndarray:
    """Bank 1's 4x4 payoff table, U[m][n] = payoff when bank 1 plays m and
    bank 2 plays n. Bank 2's table is the transpose."""
    h = lambda g, a, b: band_profit(dist, g, a, b)
    gl, gh = params.gamma_l, params.gamma_h
    tl, th = params.tau_l, params.tau_h
    # Rows indexed by bank 2's action, columns by bank 1's.
    rows = [
        [0.5 * h(gl, tl, 1.0), 0.0, 0.5 * h(gl, th, 1.0), 0.0],
        [h(gl, tl, 1.0), 0.5 * h(gh, tl, 1.0), h(gl, th, 1.0), 0.5 * h(gh, th, 1.0)],
        [h(gl, tl, th) + 0.5 * h(gl, th, 1.0), h(gh, tl, th), 0.5 * h(gl, th, 1.0), 0.0],
        [h(gl, tl, 1.0), h(gh, tl, th) + 0.5 * h(gh, th, 1.0), h(gl, th, 1.0), 0.5 * h(gh, th, 1.0)],
    ]
    return np.asarray(rows).T


def reduce_to_2x2(dist: CreditDistribution, params: BankParams) -> SymmetricGame:
    """The symmetric game on the two surviving actions.

    theta1 = (tau_l, gamma_h), theta2 = (tau_h, gamma_l); entries are read
    straight out of the 4x4 table so the two agree bit-for-bit.
    """
    u = utility_matrix(dist, params)
    i, j = SURVIVORS
    return SymmetricGame(a=u[i][i], b=u[j][i], c=u[i][j], d=u[j][j])


class DominanceInequality(NamedTuple):
    better: int
    worse: int
    opponent: int
    margin: float
    ok: bool


@dataclass(frozen=True)
class DominanceReport:
    """Pairwise payoff comparisons behind the two eliminations.

    Action 2 must beat action 0 against every opponent action, then action 1
    must beat action 3 against the survivors of the first elimination.
    """

    inequalities: tuple[DominanceInequality, ...]
    all_ok: bool


DOMINANCE_TOL = 1e-9


def dominance_check(dist: CreditDistribution, params: BankParams) -> DominanceReport:
    u = utility_matrix(dist, params)
    checks: list[DominanceInequality] = []
    for opponent in range(4):
        margin = float(u[2][opponent] - u[0][opponent])
        checks.append(DominanceInequality(2, 0, opponent, margin, margin > -DOMINANCE_TOL))
    for opponent in (1, 2, 3):
        margin = float(u[1][opponent] - u[3][opponent])
        checks.append(DominanceInequality(1, 3, opponent, margin, margin > -DOMINANCE_TOL))
    return DominanceReport(tuple(checks), all(c.ok for c in checks))


def _softmax(logw: np.ndarray) -> np.ndarray:
    shifted = logw - logw.max()
    w = np.exp(shifted)
    return w / w.sum()


@dataclass
class BankRunResult:
    """Four-action exponential-weights run plus its 2x2 reduction."""

    params: BankParams
    matrix: np.ndarray
    reduced_game: SymmetricGame
    eta: float
    t: np.ndarray
    weights1: np.ndarray  # (len(t), 4)
    weights2: np.ndarray
    steps: int
    limit_actions: Optional[tuple[int, int]]
    dominated_max_final: float
    reduced_trajectory: Trajectory
    verdict_2x2: LimitVerdict

    @property
    def final_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return self.weights1[-1], self.weights2[-1]


def _validate_weights(w, name: str) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.shape != (4,):
        raise InvalidParameterError(f"{name} must have 4 entries")
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be strictly positive (interior start)")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InvalidParameterError(f"{name} must sum to 1, got {arr.sum()!r}")
    return arr


def run_bank_experiment(
    dist: CreditDistribution,
    params: BankParams,
    init1: Sequence[float],
    init2: Sequence[float],
    eta: float,
    horizon: int,
    *,
    thinned: bool = True,
    stop_tol: float = 1e-13,
) -> BankRunResult:
    """Run both banks' four-action exponential weights, then reduce.

    Weights evolve in log space (w_m multiplied by exp(eta * expected payoff
    of action m)); the run stops early once every weight except each bank's
    leader is below ``stop_tol``. The surviving-action marginals of the
    starting weights seed a 2x2 run of the reduced game whose verdict is
    reported alongside.
    """
    if eta <= 0.0:
        raise InvalidParameterError(f"step size must be positive, got {eta}")
    if horizon < 1:
        raise InvalidParameterError(f"horizon must be >= 1, got {horizon}")
    w1 = _validate_weights(init1, "init1")
    w2 = _validate_weights(init2, "init2")
    u = utility_matrix(dist, params)
    l1 = np.log(w1)
    l2 = np.log(w2)

    rec_t: list[int] = []
    rec_w1: list[np.ndarray] = []
    rec_w2: list[np.ndarray] = []
    t = 1
    while True:
        p1 = _softmax(l1)
        p2 = _softmax(l2)
        if not thinned or t <= 1000 or t % 10 == 0 or t == horizon:
            rec_t.append(t)
            rec_w1.append(p1)
            rec_w2.append(p2)
        settled = (np.sort(p1)[-2] < stop_tol) and (np.sort(p2)[-2] < stop_tol)
        if t == horizon or settled:
            if rec_t[-1] != t:
                rec_t.append(t)
                rec_w1.append(p1)
                rec_w2.append(p2)
            break
        # Bank 2's payoff matrix is the transpose of bank 1's, so both
        # banks' per-action expected payoffs are U @ (opponent mixture).
        l1 = l1 + eta * (u @ p2)
        l2 = l2 + eta * (u @ p1)
        l1 -= l1.max()
        l2 -= l2.max()
        t += 1

    final1, final2 = rec_w1[-1], rec_w2[-1]
    limit: Optional[tuple[int, int]] = None
    if np.sort(final1)[-2] < 1e-6 and np.sort(final2)[-2] < 1e-6:
        limit = (int(final1.argmax()), int(final2.argmax()))
    dominated_max = float(
        max(final1[DOMINATED[0]], final1[DOMINATED[1]], final2[DOMINATED[0]], final2[DOMINATED[1]])
    )

    reduced = reduce_to_2x2(dist, params)
    m1 = MixedStrategy.from_p1(w1[SURVIVORS[0]] / (w1[SURVIVORS[0]] + w1[SURVIVORS[1]]))
    m2 = MixedStrategy.from_p1(w2[SURVIVORS[0]] / (w2[SURVIVORS[0]] + w2[SURVIVORS[1]]))
    reduced_traj = simulate(reduced, (m1, m2), eta, horizon=horizon, thinned=True)

    return BankRunResult(
        params=params,
        matrix=u,
        reduced_game=reduced,
        eta=eta,
        t=np.asarray(rec_t, dtype=np.int64),
        weights1=np.asarray(rec_w1),
        weights2=np.asarray(rec_w2),
        steps=t,
        limit_actions=limit,
        dominated_max_final=dominated_max,
        reduced_trajectory=reduced_traj,
        verdict_2x2=reduced_traj.verdict,
    )


def mc_utility_matrix(
    dist: CreditDistribution,
    params: BankParams,
    n_samples: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of the 4x4 table from sampled customers.

    Returns (means, standard errors). Used as an independent oracle for the
    closed-form table: each entry should land within a few standard errors.
    """
    y = dist.sample(n_samples, rng)
    actions = params.actions()
    means = np.empty((4, 4))
    errs = np.empty((4, 4))
    for m in range(4):
        for nn in range(4):
            profit = _per_customer_profit(y, actions[m], actions[nn])
            means[m][nn] = profit.mean()
            errs[m][nn] = profit.std(ddof=1) / math.sqrt(n_samples)
    return means, errs


def _per_customer_profit(
    y: np.ndarray, own: tuple[float, float], other: tuple[float, float]
) -> np.ndarray:
    tau1, g1 = own
    tau2, g2 = other
    v = (2.0 + g1) * y - 1.0
    qualified = y >= tau1
    exclusive = qualified & (y < tau2)
    shared = qualified & (y >= tau2)
    if g1 < g2:
        share = 1.0
    elif g1 > g2:
        share = 0.0
    else:
        share = 0.5
    return np.where(exclusive, v, 0.0) + share * np.where(shared, v, 0.0)


@dataclass(frozen=True)
class BankConfig:
    """One experiment: a score density, rates/thresholds, and the run setup."""

    dist: CreditDistribution
    params: BankParams
    eta: float
    init1: tuple[float, float, float, float]
    init2: tuple[float, float, float, float]
    horizon: int


#: Starting weights used by all canned demonstration configs.
DEMO_INIT1 = (0.1, 0.5, 0.3, 0.1)
DEMO_INIT2 = (0.1, 0.3, 0.5, 0.1)


def standard_configs(horizon: int = 400_000) -> dict[str, BankConfig]:
    """Four sign-labeled demonstration configs (keys: pp, mm, pm, mp).

    Each reduces to a 2x2 game whose gap signs match its key; all use the
    rational threshold rule, step size 0.1, and the demo starting weights.
    """
    gauss = {
        "pp": TruncatedGaussian(0.3, 0.1),
        "mm": TruncatedGaussian(0.1, 0.3),
        "pm": TruncatedGaussian(0.1, 0.2),
    }
    out: dict[str, BankConfig] = {}
    for key, dist in gauss.items():
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        out[key] = BankConfig(dist, params, 0.1, DEMO_INIT1, DEMO_INIT2, horizon)
    params_mp = BankParams.from_rates(0.6, 0.7, rule="rational")
    dist_mp = PiecewiseUniform(0.01, 0.95, params_mp.tau_l, params_mp.tau_h)
    out["mp"] = BankConfig(dist_mp, params_mp, 0.1, DEMO_INIT1, DEMO_INIT2, horizon)
    return out


def bank_config_from_dict(record: dict) -> BankConfig:
    """Parse the bank experiment JSON config."""
    if not isinstance(record, dict):
        raise ConfigError("bank config must be a JSON object")
    try:
        gamma_l = float(record["gamma_l"])
        gamma_h = float(record["gamma_h"])
        eta = float(record.get("eta", 0.1))
        horizon = int(record.get("horizon", 400_000))
        init1 = tuple(float(x) for x in record.get("init1", DEMO_INIT1))
        init2 = tuple(float(x) for x in record.get("init2", DEMO_INIT2))
        dist_spec = record["dist"]
        kind = dist_spec["kind"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad bank config: {exc}") from exc

    rule = record.get("threshold_rule", "appendix")
    if "tau_l" in record or "tau_h" in record:
        try:
            params = BankParams(gamma_l, gamma_h, float(record["tau_l"]), float(record["tau_h"]))
        except KeyError as exc:
            raise ConfigError("tau_l and tau_h must be given together") from exc
    else:
        params = BankParams.from_rates(gamma_l, gamma_h, rule=rule)

    if kind == "trunc_gauss":
        try:
            dist: CreditDistribution = TruncatedGaussian(
                float(dist_spec["mu"]), float(dist_spec["sigma"])
            )
        except KeyError as exc:
            raise ConfigError(f"trunc_gauss needs mu and sigma: {exc}") from exc
    elif kind == "piecewise_uniform":
        try:
            dist = PiecewiseUniform(
                float(dist_spec["beta1"]),
                float(dist_spec["beta2"]),
                float(dist_spec.get("tau_l", params.tau_l)),
                float(dist_spec.get("tau_h", params.tau_h)),
            )
        except KeyError as exc:
            raise ConfigError(f"piecewise_uniform needs beta1 and beta2: {exc}") from exc
    else:
        raise ConfigError(f"unknown distribution kind {kind!r}")

    if len(init1) != 4 or len(init2) != 4:
        raise ConfigError("init1 and init2 must each have 4 weights")
    return BankConfig(dist, params, eta, init1, init2, horizon)
