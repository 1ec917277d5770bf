import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ew2x2.equilibria import (
    JointDistribution,
    ce_borderline,
    deviation_gains,
    is_correlated_eq_bruteforce,
    is_correlated_eq_closed_form,
    is_pure_nash,
    nash_landscape,
)
from ew2x2.errors import DegenerateGameError, InvalidParameterError
from ew2x2.games import Action, MixedStrategy, SymmetricGame, game_from_eps
from ew2x2.sweep import make_rng, random_game_in_regime

T1, T2 = Action.THETA1, Action.THETA2
ALL_PAIRS = [(a, b) for a in (T1, T2) for b in (T1, T2)]

REGIME_SIGNS = [(-1, -1), (1, 1), (-1, 1), (1, -1), (0, -1), (0, 1), (-1, 0), (1, 0)]


class TestNashLandscape:
    def test_matched_negative(self):
        land = nash_landscape(game_from_eps(-2.0, -1.0))
        assert land.pure == ((T2, T2),)
        assert land.mixed is None

    def test_opposite_signs_with_mixed(self):
        land = nash_landscape(game_from_eps(-1.0, 3.0))
        assert set(land.pure) == {(T1, T2), (T2, T1)}
        assert land.mixed.as_tuple() == (0.75, 0.25)

    def test_zero_pos_families(self):
        land = nash_landscape(game_from_eps(0.0, 2.0))
        assert set(land.pure) == {(T1, T1), (T2, T1), (T1, T2)}
        assert len(land.mixed_families) == 2
        assert {f.pinned_player for f in land.mixed_families} == {1, 2}
        assert all(f.pinned_action is T1 for f in land.mixed_families)

    def test_zero_neg(self):
        land = nash_landscape(game_from_eps(0.0, -1.0))
        assert set(land.pure) == {(T1, T1), (T2, T2)}
        assert land.mixed is None

    def test_eps2_zero_relabels(self):
        # (-2, 0) is the relabeling of (0, 2): theta2 takes theta1's role
        land = nash_landscape(game_from_eps(-2.0, 0.0))
        assert set(land.pure) == {(T2, T2), (T1, T2), (T2, T1)}
        assert all(f.pinned_action is T2 for f in land.mixed_families)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateGameError):
            nash_landscape(SymmetricGame(1, 1, 1, 1))

    def test_mixed_profile_has_no_profitable_deviation(self):
        rng = make_rng(11)
        for signs in ((-1, 1), (1, -1)):
            for _ in range(50):
                g = random_game_in_regime(rng, *signs)
                p = nash_landscape(g).mixed
                from ew2x2.games import expected_utility

                base = expected_utility(g, 1, p, p)
                for dev in (MixedStrategy(1.0, 0.0), MixedStrategy(0.0, 1.0)):
                    assert expected_utility(g, 1, dev, p) - base <= 1e-12


class TestPureNashVerification:
    def test_examples(self):
        g = game_from_eps(-2.0, -1.0)
        assert is_pure_nash(g, (T2, T2))
        # deviating from (theta1, theta1) to theta2 gains 2
        assert not is_pure_nash(g, (T1, T1))
        assert is_pure_nash(game_from_eps(0.0, 2.0), (T1, T2))

    def test_landscape_is_exactly_the_passing_set(self):
        rng = make_rng(12)
        for signs in REGIME_SIGNS:
            for _ in range(40):
                g = random_game_in_regime(rng, *signs)
                listed = set(nash_landscape(g).pure)
                for pair in ALL_PAIRS:
                    assert is_pure_nash(g, pair) == (pair in listed)


class TestJointDistribution:
    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            JointDistribution(0.5, 0.5, 0.5, -0.5)
        with pytest.raises(InvalidParameterError):
            JointDistribution(0.5, 0.5, 0.5, 0.5)

    def test_point_mass_and_product(self):
        nu = JointDistribution.point_mass((T2, T2))
        assert nu.as_tuple() == (0.0, 0.0, 0.0, 1.0)
        prod = JointDistribution.product(MixedStrategy(0.75, 0.25), MixedStrategy(0.75, 0.25))
        assert prod.nu11 == pytest.approx(0.5625)


class TestCorrelatedEquilibria:
    def test_uniform_is_ce_for_symmetric_opposite_gaps(self):
        g = game_from_eps(-1.0, 1.0)
        nu = JointDistribution(0.25, 0.25, 0.25, 0.25)
        assert is_correlated_eq_closed_form(g, nu)
        assert is_correlated_eq_bruteforce(g, nu)

    def test_diagonal_mass_fails_closed_form(self):
        g = game_from_eps(-1.0, 1.0)
        nu = JointDistribution(1.0, 0.0, 0.0, 0.0)
        assert not is_correlated_eq_closed_form(g, nu)
        assert not is_correlated_eq_bruteforce(g, nu)

    def test_dominant_corner_is_the_matched_sign_ce(self):
        g = game_from_eps(-2.0, -1.0)
        assert is_correlated_eq_closed_form(g, JointDistribution(0, 0, 0, 1.0))
        assert not is_correlated_eq_closed_form(g, JointDistribution(0, 0, 1.0, 0))

    def test_pure_nash_point_masses_are_ce(self):
        rng = make_rng(13)
        for signs in REGIME_SIGNS:
            g = random_game_in_regime(rng, *signs)
            for pair in nash_landscape(g).pure:
                nu = JointDistribution.point_mass(pair)
                assert is_correlated_eq_bruteforce(g, nu)
                assert is_correlated_eq_closed_form(g, nu)

    def test_wrong_corner_fails_bruteforce(self):
        g = game_from_eps(-1.0, 3.0)
        # recommended theta1 against theta1: deviating to theta2 gains 1
        gains = deviation_gains(g, JointDistribution.point_mass((T1, T1)))
        assert max(gains) == pytest.approx(1.0)
        assert not is_correlated_eq_bruteforce(g, JointDistribution.point_mass((T1, T1)))

    def test_mixed_profile_product_is_ce(self):
        g = game_from_eps(-1.0, 3.0)
        p = nash_landscape(g).mixed
        nu = JointDistribution.product(p, p)
        assert is_correlated_eq_bruteforce(g, nu)
        assert is_correlated_eq_closed_form(g, nu)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateGameError):
            is_correlated_eq_closed_form(
                SymmetricGame(0, 0, 0, 0), JointDistribution(1, 0, 0, 0)
            )

    def test_oracle_equivalence_sample(self):
        rng = make_rng(14)
        checked = 0
        for signs in REGIME_SIGNS:
            for _ in range(400):
                g = random_game_in_regime(rng, *signs)
                nu = JointDistribution(*(float(x) for x in rng.dirichlet(np.ones(4))))
                if ce_borderline(g, nu):
                    continue
                assert is_correlated_eq_closed_form(g, nu) == is_correlated_eq_bruteforce(g, nu)
                checked += 1
        assert checked > 3000

    def test_eps2_zero_cases_reduce_by_relabeling(self):
        # (+, 0): only the theta1 diagonal can carry off-diagonal-free mass
        g = game_from_eps(2.0, 0.0)
        assert is_correlated_eq_closed_form(g, JointDistribution(1.0, 0, 0, 0))
        assert is_correlated_eq_closed_form(g, JointDistribution(0.5, 0, 0, 0.5))
        assert not is_correlated_eq_closed_form(g, JointDistribution(0.0, 0.5, 0, 0.5))
        # (-, 0): mirror of (0, +): no mass on the (theta1, theta1) corner
        g = game_from_eps(-2.0, 0.0)
        assert is_correlated_eq_closed_form(g, JointDistribution(0, 0.25, 0.25, 0.5))
        assert not is_correlated_eq_closed_form(g, JointDistribution(0.1, 0.2, 0.2, 0.5))
