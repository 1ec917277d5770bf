import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ew2x2.bank import (
    BankParams,
    PiecewiseUniform,
    TruncatedGaussian,
    band_profit,
    bank_config_from_dict,
    dominance_check,
    mc_utility_matrix,
    reduce_to_2x2,
    run_bank_experiment,
    standard_configs,
    utility_matrix,
)
from ew2x2.dynamics import simulate
from ew2x2.errors import ConfigError, InvalidParameterError, InvalidRangeError
from ew2x2.games import MixedStrategy, SignRegime
from ew2x2.sweep import make_rng


def uniform_density(params: BankParams) -> PiecewiseUniform:
    """The uniform density on [0,1], expressed on the game's segments."""
    return PiecewiseUniform(
        params.tau_l, params.tau_h - params.tau_l, params.tau_l, params.tau_h
    )


def simpson_profit(dist, gamma, lo, hi, tol=1e-11):
    """Adaptive Simpson quadrature of ((2+gamma) y - 1) * pdf(y)."""

    def f(y):
        return ((2.0 + gamma) * y - 1.0) * dist.pdf(y)

    def simpson(a, b, fa, fm, fb):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, eps, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(a, m, fa, flm, fm)
        right = simpson(m, b, fm, frm, fb)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + recurse(
            m, b, fm, frm, fb, right, eps / 2.0, depth - 1
        )

    # split at the density's knots so the integrand is smooth per piece
    total = 0.0
    pieces = [lo, hi]
    if isinstance(dist, PiecewiseUniform):
        pieces = sorted({lo, hi} | {x for x in (dist.tau_l, dist.tau_h) if lo < x < hi})
    for a, b in zip(pieces[:-1], pieces[1:]):
        m = 0.5 * (a + b)
        fa, fm, fb = f(a + 1e-13), f(m), f(b - 1e-13)
        total += recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40)
    return total


class TestBandProfit:
    def test_empty_band_is_zero(self):
        dist = TruncatedGaussian(0.3, 0.2)
        assert band_profit(dist, 0.5, 0.4, 0.4) == 0.0

    def test_uniform_full_range_closed_form(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        dist = uniform_density(params)
        # integral of (2.4 y - 1) over [0, 1] = 1.2 - 1
        assert band_profit(dist, 0.4, 0.0, 1.0) == pytest.approx(0.2, abs=1e-12)

    def test_sign_split_around_the_break_even_score(self):
        y_break = 1.0 / 2.4
        for dist in (TruncatedGaussian(0.3, 0.2), TruncatedGaussian(0.1, 0.3)):
            assert band_profit(dist, 0.4, 0.1, y_break) < 0.0
            assert band_profit(dist, 0.4, y_break, 0.9) > 0.0

    def test_range_validation(self):
        dist = TruncatedGaussian(0.3, 0.2)
        with pytest.raises(InvalidRangeError):
            band_profit(dist, 0.4, 0.6, 0.5)
        with pytest.raises(InvalidRangeError):
            band_profit(dist, 0.4, -0.1, 0.5)

    @given(
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=0.05, max_value=0.95),
        st.floats(min_value=0.01, max_value=0.99),
    )
    @settings(max_examples=100)
    def test_additivity_across_interior_splits(self, a, b, c, gamma):
        lo, mid, hi = sorted((a, b, c))
        dist = TruncatedGaussian(0.2, 0.25)
        whole = band_profit(dist, gamma, lo, hi)
        parts = band_profit(dist, gamma, lo, mid) + band_profit(dist, gamma, mid, hi)
        assert whole == pytest.approx(parts, abs=1e-10)

    def test_bounds_and_rate_monotonicity(self):
        rng = make_rng(51)
        for _ in range(100):
            mu = float(rng.uniform(0.0, 1.0))
            sigma = float(rng.uniform(0.05, 0.5))
            dist = TruncatedGaussian(mu, sigma)
            lo = float(rng.uniform(0.0, 0.9))
            hi = float(rng.uniform(lo, 1.0))
            g1 = float(rng.uniform(0.01, 0.5))
            g2 = float(rng.uniform(g1, 0.99))
            h1 = band_profit(dist, g1, lo, hi)
            h2 = band_profit(dist, g2, lo, hi)
            assert -1.0 <= h1 <= 2.0
            assert h2 >= h1 - 1e-12
            if lo > 0.0 and hi > lo:
                assert h2 > h1  # positive mass at positive scores

    def test_gaussian_moments_match_quadrature(self):
        rng = make_rng(52)
        for _ in range(100):
            dist = TruncatedGaussian(float(rng.uniform(0, 1)), float(rng.uniform(0.05, 0.4)))
            lo = float(rng.uniform(0.0, 0.9))
            hi = float(rng.uniform(lo, 1.0))
            gamma = float(rng.uniform(0.01, 0.99))
            closed = band_profit(dist, gamma, lo, hi)
            quad = simpson_profit(dist, gamma, lo, hi)
            assert closed == pytest.approx(quad, abs=1e-8)

    def test_piecewise_matches_quadrature(self):
        dist = PiecewiseUniform(0.01, 0.95, 0.37, 0.385)
        for (lo, hi, gamma) in ((0.0, 1.0, 0.6), (0.2, 0.5, 0.7), (0.37, 0.385, 0.65)):
            assert band_profit(dist, gamma, lo, hi) == pytest.approx(
                simpson_profit(dist, gamma, lo, hi), abs=1e-8
            )


class TestDistributions:
    def test_total_mass_is_one(self):
        for dist in (
            TruncatedGaussian(0.3, 0.1),
            TruncatedGaussian(0.1, 0.3),
            PiecewiseUniform(0.01, 0.95, 0.37, 0.385),
        ):
            assert dist.mass(0.0, 1.0) == pytest.approx(1.0, abs=1e-10)

    def test_parameter_validation(self):
        with pytest.raises(InvalidParameterError):
            TruncatedGaussian(0.5, 0.0)
        with pytest.raises(InvalidParameterError):
            PiecewiseUniform(0.6, 0.6, 0.3, 0.7)
        with pytest.raises(InvalidParameterError):
            PiecewiseUniform(0.1, 0.2, 0.7, 0.3)

    def test_sampling_tracks_the_cdf(self):
        rng = make_rng(53)
        for dist in (TruncatedGaussian(0.2, 0.25), PiecewiseUniform(0.3, 0.4, 0.25, 0.75)):
            y = dist.sample(200_000, rng)
            assert y.min() >= 0.0 and y.max() <= 1.0
            for q in (0.2, 0.5, 0.8):
                assert (y <= q).mean() == pytest.approx(dist.mass(0.0, q), abs=5e-3)


def generic_table_entry(dist, own, other):
    """Independent oracle: evaluate the allocation rules directly.

    own/other are (threshold, rate) pairs for bank 1 / bank 2; customers in
    [own.tau, other.tau) are exclusive, those above both go to the cheaper
    rate (ties split).
    """
    tau1, g1 = own
    tau2, g2 = other
    total = 0.0
    if tau1 < tau2:
        total += band_profit(dist, g1, tau1, tau2)
    both = max(tau1, tau2)
    if g1 < g2:
        total += band_profit(dist, g1, both, 1.0)
    elif g1 == g2:
        total += 0.5 * band_profit(dist, g1, both, 1.0)
    return total


class TestUtilityMatrix:
    def test_matches_the_allocation_rules(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        for dist in (TruncatedGaussian(0.3, 0.1), uniform_density(params)):
            table = utility_matrix(dist, params)
            actions = params.actions()
            for m in range(4):
                for n in range(4):
                    want = generic_table_entry(dist, actions[m], actions[n])
                    assert table[m][n] == pytest.approx(want, abs=1e-12), (m, n)

    def test_matched_actions_split_the_market(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        dist = TruncatedGaussian(0.3, 0.1)
        table = utility_matrix(dist, params)
        for k, (tau, gamma) in enumerate(params.actions()):
            assert table[k][k] == pytest.approx(0.5 * band_profit(dist, gamma, tau, 1.0))

    def test_zero_cells(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        table = utility_matrix(dist := TruncatedGaussian(0.3, 0.1), params)
        # undercut on rate at the same threshold leaves bank 1 nothing
        assert table[1][0] == 0.0
        assert table[3][0] == 0.0
        assert table[3][2] == 0.0

    def test_bank2_is_the_transpose(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        dist = TruncatedGaussian(0.2, 0.2)
        table = utility_matrix(dist, params)
        actions = params.actions()
        # bank 2's payoff for playing n against bank 1's m, computed by role
        # swap through the allocation oracle, fills exactly the transpose
        bank2 = np.array(
            [
                [generic_table_entry(dist, actions[n], actions[m]) for n in range(4)]
                for m in range(4)
            ]
        )
        assert bank2 == pytest.approx(table.T, abs=1e-12)

    def test_monte_carlo_oracle_agrees(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        dist = TruncatedGaussian(0.1, 0.3)
        exact = utility_matrix(dist, params)
        mc, se = mc_utility_matrix(dist, params, 200_000, make_rng(54))
        assert np.all(np.abs(mc - exact) <= 5.0 * se + 1e-12)


class TestReductionAndDominance:
    def test_reduction_entries_are_the_survivor_block(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        dist = TruncatedGaussian(0.3, 0.1)
        table = utility_matrix(dist, params)
        g = reduce_to_2x2(dist, params)
        assert (g.a, g.b, g.c, g.d) == (table[1][1], table[2][1], table[1][2], table[2][2])

    def test_demo_configs_hit_all_four_sign_patterns(self):
        want = {
            "pp": SignRegime.POS_POS,
            "mm": SignRegime.NEG_NEG,
            "pm": SignRegime.POS_NEG,
            "mp": SignRegime.NEG_POS,
        }
        for key, cfg in standard_configs().items():
            assert reduce_to_2x2(cfg.dist, cfg.params).sign_regime() is want[key]

    def test_rational_thresholds_make_dominance_strict(self):
        params = BankParams.from_rates(0.4, 0.8, rule="rational")
        rep = dominance_check(uniform_density(params), params)
        assert rep.all_ok
        assert all(c.margin > 1e-9 for c in rep.inequalities)

    def test_appendix_thresholds_break_dominance(self):
        # the wide thresholds put profitable scores below tau_h, so holding
        # out for tau_h forfeits them and the first elimination fails
        params = BankParams.from_rates(0.4, 0.8, rule="appendix")
        rep = dominance_check(uniform_density(params), params)
        assert not rep.all_ok

    def test_dominance_holds_across_random_full_support_densities(self):
        rng = make_rng(55)
        for _ in range(100):
            gl = float(rng.uniform(0.05, 0.6))
            gh = float(rng.uniform(gl + 0.05, 0.95))
            params = BankParams.from_rates(gl, gh, rule="rational")
            if rng.uniform() < 0.5:
                dist = TruncatedGaussian(float(rng.uniform(0, 1)), float(rng.uniform(0.05, 0.4)))
            else:
                b1 = float(rng.uniform(0.01, 0.5))
                b2 = float(rng.uniform(0.01, 0.98 - b1))
                dist = PiecewiseUniform(b1, b2, params.tau_l, params.tau_h)
            assert dominance_check(dist, params).all_ok


class TestFourActionRun:
    def test_reduced_marginals_track_the_2x2_dynamic(self):
        cfg = standard_configs()["mp"]
        res = run_bank_experiment(
            cfg.dist, cfg.params, cfg.init1, cfg.init2, cfg.eta, horizon=20_000, thinned=False
        )
        start = int(np.argmax(
            (res.weights1[:, [0, 3]].max(axis=1) < 1e-12)
            & (res.weights2[:, [0, 3]].max(axis=1) < 1e-12)
        ))
        assert start > 0, "dominated weights never fell below 1e-12 in the window"
        m1 = res.weights1[start]
        m2 = res.weights2[start]
        init = (
            MixedStrategy.from_p1(m1[1] / (m1[1] + m1[2])),
            MixedStrategy.from_p1(m2[1] / (m2[1] + m2[2])),
        )
        two = simulate(res.reduced_game, init, cfg.eta, horizon=101, thinned=False,
                       early_stop=False)
        for k in range(100):
            w1 = res.weights1[start + k]
            w2 = res.weights2[start + k]
            got1 = w1[1] / (w1[1] + w1[2])
            got2 = w2[1] / (w2[1] + w2[2])
            want1 = 1.0 / (1.0 + math.exp(-two.u1[k]))
            want2 = 1.0 / (1.0 + math.exp(-two.u2[k]))
            assert abs(got1 - want1) < 1e-6 and abs(got2 - want2) < 1e-6

    def test_run_validates_inputs(self):
        cfg = standard_configs()["pp"]
        with pytest.raises(InvalidParameterError):
            run_bank_experiment(cfg.dist, cfg.params, (0.25, 0.25, 0.25, 0.25),
                                (1.0, 0.0, 0.0, 0.0), 0.1, 100)
        with pytest.raises(InvalidParameterError):
            run_bank_experiment(cfg.dist, cfg.params, cfg.init1, cfg.init2, -0.1, 100)


class TestBankConfig:
    def test_parse_gaussian(self):
        cfg = bank_config_from_dict(
            {
                "dist": {"kind": "trunc_gauss", "mu": 0.3, "sigma": 0.1},
                "gamma_l": 0.4,
                "gamma_h": 0.8,
                "eta": 0.1,
                "init1": [0.1, 0.5, 0.3, 0.1],
                "init2": [0.1, 0.3, 0.5, 0.1],
                "horizon": 1000,
                "threshold_rule": "rational",
            }
        )
        assert isinstance(cfg.dist, TruncatedGaussian)
        assert cfg.params.tau_l == pytest.approx(1.0 / 2.8)

    def test_default_rule_is_appendix(self):
        cfg = bank_config_from_dict(
            {
                "dist": {"kind": "trunc_gauss", "mu": 0.3, "sigma": 0.1},
                "gamma_l": 0.4,
                "gamma_h": 0.8,
            }
        )
        assert cfg.params.tau_l == pytest.approx(1.0 / 1.8)
        assert cfg.params.tau_h == pytest.approx(1.0 / 1.4)

    def test_piecewise_defaults_to_game_thresholds(self):
        cfg = bank_config_from_dict(
            {
                "dist": {"kind": "piecewise_uniform", "beta1": 0.01, "beta2": 0.95},
                "gamma_l": 0.6,
                "gamma_h": 0.7,
                "threshold_rule": "rational",
            }
        )
        assert cfg.dist.tau_l == cfg.params.tau_l
        assert cfg.dist.tau_h == cfg.params.tau_h

    def test_bad_configs_raise(self):
        with pytest.raises(ConfigError):
            bank_config_from_dict({"dist": {"kind": "nope"}, "gamma_l": 0.4, "gamma_h": 0.8})
        with pytest.raises(ConfigError):
            bank_config_from_dict({"gamma_l": 0.4, "gamma_h": 0.8})
