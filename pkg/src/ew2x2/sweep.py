"""Seeded experiment campaigns: prediction vs. simulation, in bulk.

Every random draw flows from one root seed through numpy's counter-based
Philox generator (``philox4x64``), with one child stream per game index
spawned via SeedSequence, so campaigns are reproducible byte-for-byte and
can be fanned out over a process pool without changing the output: results
are merged in configuration-index order regardless of completion order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifier import Agreement, RegimePrediction, TableRow, check_prediction, classify
from .dynamics import (
    DEFAULT_TOLERANCES,
    DetectorTolerances,
    LimitVerdict,
    Trajectory,
    simulate,
)
from .errors import InvalidParameterError
from .games import MixedStrategy, SymmetricGame, theta1_advantage
from .theory import two_flip_bound

RNG_ALGORITHM = "philox4x64 (numpy Philox; SeedSequence spawn per game index)"

#: Games with a gap magnitude below this are rejected by the sampler; the
#: zero-gap rows are measure-zero and must be constructed, not sampled.
MIN_GAP = 1e-3

INIT_MODES = ("random", "identical", "opposite-sign", "same-sign", "equal-and-opposite")


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_game(
    rng: np.random.Generator,
    payoff_range: tuple[float, float] = (-2.0, 2.0),
    min_gap: float = MIN_GAP,
) -> SymmetricGame:
    """Uniform i.i.d. payoffs, rejecting near-zero gaps."""
    lo, hi = payoff_range
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidParameterError(f"bad payoff range ({lo}, {hi})")
    while True:
        a, b, c, d = rng.uniform(lo, hi, size=4)
        game = SymmetricGame(a, b, c, d)
        if abs(game.eps1()) >= min_gap and abs(game.eps2()) >= min_gap:
            return game


def random_game_in_regime(
    rng: np.random.Generator,
    sign1: int,
    sign2: int,
    payoff_range: tuple[float, float] = (-2.0, 2.0),
    min_gap: float = MIN_GAP,
) -> SymmetricGame:
    """Rejection-sample until the gap signs match (sign1, sign2) in {-1, 0, +1}.

    A zero sign is constructed exactly by copying the relevant payoff
    (b = a or d = c), since sampling can never hit it.
    """
    while True:
        game = random_game(rng, payoff_range, min_gap)
        a, b, c, d = game.a, game.b, game.c, game.d
        if sign1 == 0:
            b = a
        if sign2 == 0:
            d = c
        game = SymmetricGame(a, b, c, d)
        e1, e2 = game.eps()
        ok1 = (sign1 == 0 and e1 == 0.0) or (sign1 != 0 and math.copysign(1, e1) == sign1 and abs(e1) >= min_gap)
        ok2 = (sign2 == 0 and e2 == 0.0) or (sign2 != 0 and math.copysign(1, e2) == sign2 and abs(e2) >= min_gap)
        if ok1 and ok2:
            return game


def _interior_strategy(rng: np.random.Generator, spread: float = 3.0) -> MixedStrategy:
    return MixedStrategy.from_log_ratio(float(rng.uniform(-spread, spread)))


def _root_shift(game: SymmetricGame) -> float:
    e1, e2 = game.eps()
    if e1 * e2 < 0.0:
        return math.log(abs(e2)) - math.log(abs(e1))
    return 0.0


def random_init(
    game: SymmetricGame, mode: str, rng: np.random.Generator
) -> tuple[MixedStrategy, MixedStrategy]:
    """Draw an initialization in the requested relation to the game.

    Sign-targeted modes place the players' log-ratios on chosen sides of the
    advantage root and are only available for opposite-sign gap games. All
    modes redraw until both advantage functionals are nonzero (zero is
    measure-zero but floats can land on it).
    """
    if mode not in INIT_MODES:
        raise InvalidParameterError(f"unknown init mode {mode!r}; pick from {INIT_MODES}")
    shift = _root_shift(game)
    mixed = game.eps()[0] * game.eps()[1] < 0.0
    if mode in ("opposite-sign", "same-sign") and not mixed:
        raise InvalidParameterError(f"init mode {mode!r} needs opposite-sign gaps")
    for _ in range(1000):
        if mode == "identical":
            s = _interior_strategy(rng)
            pair = (s, s)
        elif mode == "equal-and-opposite":
            x = float(rng.uniform(0.1, 3.0))
            pair = (
                MixedStrategy.from_log_ratio(shift + x),
                MixedStrategy.from_log_ratio(shift - x),
            )
        elif mode == "opposite-sign":
            side = 1.0 if rng.uniform() < 0.5 else -1.0
            x1 = float(rng.uniform(0.1, 3.0))
            x2 = float(rng.uniform(0.1, 3.0))
            pair = (
                MixedStrategy.from_log_ratio(shift + side * x1),
                MixedStrategy.from_log_ratio(shift - side * x2),
            )
        elif mode == "same-sign":
            side = 1.0 if rng.uniform() < 0.5 else -1.0
            x1 = float(rng.uniform(0.1, 3.0))
            x2 = float(rng.uniform(0.1, 3.0))
            while abs(x1 - x2) < 0.05:
                x2 = float(rng.uniform(0.1, 3.0))
            pair = (
                MixedStrategy.from_log_ratio(shift + side * x1),
                MixedStrategy.from_log_ratio(shift + side * x2),
            )
        else:
            pair = (_interior_strategy(rng), _interior_strategy(rng))
        d1 = theta1_advantage(game, pair[0])
        d2 = theta1_advantage(game, pair[1])
        if d1 != 0.0 and d2 != 0.0:
            return pair
    raise InvalidParameterError(f"could not draw a non-degenerate init in mode {mode!r}")


@dataclass(frozen=True)
class SweepConfig:
    """A reproducible prediction-vs-simulation campaign."""

    seed: int
    count: int
    etas: tuple[float, ...] = (1.0,)
    horizon: int = 1_000_000
    payoff_range: tuple[float, float] = (-2.0, 2.0)
    init_mode: str = "random"
    regime_signs: Optional[tuple[int, int]] = None  # force gap signs, e.g. (-1, 1)
    games: tuple[SymmetricGame, ...] = ()  # explicit source; overrides count
    workers: int = 0  # 0/1 = serial
    keep_trajectories: bool = False  # needed when per-run CSVs are emitted

    def __post_init__(self):
        if self.count < 1 and not self.games:
            raise InvalidParameterError("count must be >= 1")
        if not self.etas or any(e <= 0.0 for e in self.etas):
            raise InvalidParameterError(f"step sizes must be positive, got {self.etas}")
        if self.init_mode not in INIT_MODES:
            raise InvalidParameterError(f"unknown init mode {self.init_mode!r}")


@dataclass
class RunRecord:
    """One (game, init, eta) run: the prediction, the outcome, the score."""

    index: int
    game: SymmetricGame
    init: tuple[MixedStrategy, MixedStrategy]
    eta: float
    prediction: RegimePrediction
    verdict: LimitVerdict
    agreement: Agreement
    steps: int
    two_flips: int
    one_flips: int
    bound_n_max: Optional[float]
    trajectory: Optional[Trajectory] = None


@dataclass
class VerificationReport:
    config: SweepConfig
    rng_algorithm: str
    rows: list[RunRecord]
    by_row: dict[str, dict[str, int]]
    mismatches_under_satisfied_requirements: int

    @property
    def total(self) -> int:
        return len(self.rows)


def run_one(
    game: SymmetricGame,
    init: tuple[MixedStrategy, MixedStrategy],
    eta: float,
    horizon: int,
    index: int = 0,
    tolerances: DetectorTolerances = DEFAULT_TOLERANCES,
    thinned: bool = True,
    keep_trajectory: bool = False,
) -> RunRecord:
    prediction = classify(game, init, eta)
    traj = simulate(game, init, eta, horizon=horizon, tolerances=tolerances, thinned=thinned)
    agreement = check_prediction(prediction, traj.verdict)
    bound = None
    e1, e2 = game.eps()
    if e1 < 0.0 < e2:
        w1 = abs(init[0].log_ratio() - init[1].log_ratio())
        if w1 > 0.0:
            bound = two_flip_bound(game, eta, w1).n_max
    return RunRecord(
        index=index,
        game=game,
        init=init,
        eta=eta,
        prediction=prediction,
        verdict=traj.verdict,
        agreement=agreement,
        steps=traj.steps,
        two_flips=traj.two_flip_count() if traj.flip_counts is not None else 0,
        one_flips=traj.one_flip_count() if traj.flip_counts is not None else 0,
        bound_n_max=bound,
        trajectory=traj if keep_trajectory else None,
    )


def _build_jobs(config: SweepConfig) -> list[tuple]:
    seeds = np.random.SeedSequence(config.seed).spawn(
        len(config.games) or config.count
    )
    jobs = []
    index = 0
    for k, child in enumerate(seeds):
        rng = make_rng(child)
        if config.games:
            game = config.games[k]
        elif config.regime_signs is not None:
            game = random_game_in_regime(
                rng, config.regime_signs[0], config.regime_signs[1], config.payoff_range
            )
        else:
            game = random_game(rng, config.payoff_range)
        init = random_init(game, config.init_mode, rng)
        for eta in config.etas:
            jobs.append((game, init, eta, config.horizon, index, config.keep_trajectories))
            index += 1
    return jobs


def _run_job(job: tuple) -> RunRecord:
    game, init, eta, horizon, index, keep = job
    return run_one(game, init, eta, horizon, index=index, keep_trajectory=keep)


def run_sweep(config: SweepConfig) -> VerificationReport:
    """Execute the campaign; results are merged in configuration order."""
    jobs = _build_jobs(config)
    if config.workers and config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(_run_job, jobs, chunksize=4))
    else:
        rows = [_run_job(job) for job in jobs]

    by_row: dict[str, dict[str, int]] = {}
    bad = 0
    for rec in rows:
        bucket = by_row.setdefault(
            rec.prediction.row.value,
            {a.value: 0 for a in Agreement} | {"total": 0},
        )
        bucket[rec.agreement.value] += 1
        bucket["total"] += 1
        if rec.agreement is Agreement.MISMATCH and rec.prediction.eta_satisfied:
            bad += 1
    return VerificationReport(
        config=config,
        rng_algorithm=RNG_ALGORITHM,
        rows=rows,
        by_row=by_row,
        mismatches_under_satisfied_requirements=bad,
    )
