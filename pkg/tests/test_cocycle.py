import numpy as np
import pytest

from cmvspec.cocycle import (AvalancheHypothesisError, SpectralPoint,
                             avalanche_report, check_ln_monotonicity,
                             cocycle_step, lyapunov_avalanche, lyapunov_finite,
                             strip_continuity_check, transfer_log_norms,
                             transfer_product, uniform_upper_check)
from cmvspec.torus import Phase, reduce_phase

FLOQUET_L = np.log(np.sqrt(3.0))   # constant alpha=0.5, z=1 oracle


class TestSpectralPoint:
    def test_branch(self):
        z = SpectralPoint(3.0)
        assert abs(z.z) == pytest.approx(1.0, abs=1e-15)
        assert z.sqrt_z ** 2 == pytest.approx(z.z, abs=1e-15)

    def test_wraps(self):
        z = SpectralPoint(2 * np.pi + 1.0)
        assert z.theta == pytest.approx(1.0)


class TestCocycleStep:
    def test_free_identity(self, f_zero):
        m = cocycle_step(f_zero, SpectralPoint(0.0), Phase((0.3,)))
        assert np.allclose(m, np.eye(2))

    def test_free_rotation(self, f_zero):
        th = 1.234
        m = cocycle_step(f_zero, SpectralPoint(th), Phase((0.5,)))
        assert np.allclose(m, np.diag([np.exp(0.5j * th), np.exp(-0.5j * th)]))
        assert np.linalg.norm(m, 2) == pytest.approx(1.0)

    def test_determinant_one(self, f_two_mode):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            z = SpectralPoint(2 * np.pi * rng.random())
            x = Phase(tuple(rng.random(2)))
            m = cocycle_step(f_two_mode, z, x)
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            assert abs(det - 1.0) < 1e-13


class TestTransferProduct:
    def test_single_step(self, f_two_mode, freq2):
        z = SpectralPoint(0.9)
        x = Phase((0.2, 0.6))
        pr = transfer_product(f_two_mode, freq2, z, x, 1)
        full = np.exp(pr.log_norm) * pr.matrix
        assert np.allclose(full, cocycle_step(f_two_mode, z, x), atol=1e-14)

    def test_cocycle_identity(self, f_two_mode, freq2):
        z = SpectralPoint(1.7)
        rng = np.random.default_rng(1)
        for _ in range(5):
            x = Phase(tuple(rng.random(2)))
            n1, n2 = int(rng.integers(1, 64)), int(rng.integers(1, 64))
            full = transfer_product(f_two_mode, freq2, z, x, n1 + n2)
            left = transfer_product(f_two_mode, freq2, z,
                                    reduce_phase(x.array() + n1 * freq2.array()), n2)
            right = transfer_product(f_two_mode, freq2, z, x, n1)
            lhs = np.exp(full.log_norm) * full.matrix
            rhs = (np.exp(left.log_norm) * left.matrix) @ \
                  (np.exp(right.log_norm) * right.matrix)
            assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)) < 1e-10

    def test_floquet_growth(self, f_const, freq1):
        pr = transfer_product(f_const, freq1, SpectralPoint(0.0),
                              Phase((0.1,)), 1000)
        assert pr.log_norm2 / 1000 == pytest.approx(FLOQUET_L, abs=1e-4)

    def test_renormalized_matches_naive(self, f_two_mode, freq2):
        z = SpectralPoint(0.4)
        x = Phase((0.15, 0.85))
        n = 30
        pr = transfer_product(f_two_mode, freq2, z, x, n)
        naive = np.eye(2, dtype=complex)
        for j in range(n):
            xj = reduce_phase(x.array() + j * freq2.array())
            naive = cocycle_step(f_two_mode, z, xj) @ naive
        full = np.exp(pr.log_norm) * pr.matrix
        assert np.max(np.abs(full - naive)) / np.max(np.abs(naive)) < 1e-8

    def test_det_invariance_long_products(self, f_two_mode, freq2):
        z = SpectralPoint(1.0)
        for n in (100, 1000, 10_000):
            pr = transfer_product(f_two_mode, freq2, z, Phase((0.3, 0.4)), n)
            assert abs(pr.log_det_abs) <= 1e-10 * n

    def test_norm_at_least_one(self, f_two_mode, freq2):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(1, 200))
            pr = transfer_product(f_two_mode, freq2,
                                  SpectralPoint(2 * np.pi * rng.random()),
                                  Phase(tuple(rng.random(2))), n)
            assert pr.log_norm2 >= -1e-12
            assert pr.u_n >= -1e-10

    def test_subadditivity_pointwise(self, f_two_mode, freq2):
        z = SpectralPoint(1.3)
        rng = np.random.default_rng(3)
        for _ in range(20):
            x = Phase(tuple(rng.random(2)))
            n1, n2 = int(rng.integers(1, 50)), int(rng.integers(1, 50))
            l_full = transfer_product(f_two_mode, freq2, z, x, n1 + n2).log_norm2
            l_1 = transfer_product(f_two_mode, freq2, z, x, n1).log_norm2
            l_2 = transfer_product(
                f_two_mode, freq2, z,
                reduce_phase(x.array() + n1 * freq2.array()), n2).log_norm2
            assert l_full <= l_1 + l_2 + 1e-10

    def test_checkpoint_sweep_matches(self, f_two_mode, freq2):
        z = SpectralPoint(0.8)
        x = Phase((0.22, 0.91))
        logs = transfer_log_norms(f_two_mode, freq2, z, x, [10, 20, 40])
        for n in (10, 20, 40):
            pr = transfer_product(f_two_mode, freq2, z, x, n)
            assert logs[n] == pytest.approx(pr.log_norm2, abs=1e-9)


class TestLyapunovFinite:
    def test_zero_function_exact(self, f_zero, freq1):
        est = lyapunov_finite(f_zero, freq1, SpectralPoint(2.0), 50, 20, seed=0)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_floquet_value(self, f_const, freq1):
        est = lyapunov_finite(f_const, freq1, SpectralPoint(0.0), 100, 10, seed=0)
        assert est.value == pytest.approx(FLOQUET_L, abs=1e-3)

    def test_elliptic_point(self, f_const, freq1):
        est = lyapunov_finite(f_const, freq1, SpectralPoint(np.pi), 500, 5, seed=0)
        assert est.value == pytest.approx(0.0, abs=1e-2)

    def test_deterministic(self, f_two_mode, freq2):
        z = SpectralPoint(1.1)
        a = lyapunov_finite(f_two_mode, freq2, z, 40, 30, seed=7)
        b = lyapunov_finite(f_two_mode, freq2, z, 40, 30, seed=7)
        assert a.value == b.value and a.std_error == b.std_error


class TestAvalanche:
    def test_commuting_exact_zero(self):
        mats = [np.diag([10.0, 0.1])] * 8
        rep = avalanche_report(mats)
        assert rep.expression == 0.0
        assert rep.hypotheses_ok

    def test_random_hyperbolic_bound(self):
        rng = np.random.default_rng(4)
        checked = 0
        for _ in range(50):
            lam = 20.0 + 30.0 * rng.random()
            mats = []
            for _ in range(10):
                t1, t2 = 0.2 * rng.standard_normal(2)
                r1 = np.array([[np.cos(t1), -np.sin(t1)], [np.sin(t1), np.cos(t1)]])
                r2 = np.array([[np.cos(t2), -np.sin(t2)], [np.sin(t2), np.cos(t2)]])
                mats.append(r1 @ np.diag([lam, 1 / lam]) @ r2)
            rep = avalanche_report(mats, c_a=10.0)
            if rep.hypotheses_ok:
                checked += 1
                assert rep.expression < rep.bound
        assert checked >= 45

    def test_norm_floor_violation(self, f_zero, freq1):
        with pytest.raises(AvalancheHypothesisError) as err:
            lyapunov_avalanche(f_zero, freq1, SpectralPoint(1.0), 8, 1, 4, seed=0)
        assert "min norm" in str(err.value)

    def test_floquet_estimate(self, f_const, freq1):
        est = lyapunov_avalanche(f_const, freq1, SpectralPoint(0.0), 16, 2, 5,
                                 seed=0)
        assert est.method == "avalanche"
        assert est.value == pytest.approx(FLOQUET_L, abs=1e-3)

    def test_agrees_with_direct(self, f_two_mode, freq2):
        z = SpectralPoint(1.0)
        av = lyapunov_avalanche(f_two_mode, freq2, z, 25, 2, 40, seed=3)
        direct = lyapunov_finite(f_two_mode, freq2, z, av.n, 40, seed=3)
        tol = 3 * (av.std_error + direct.std_error) + 5e-3
        assert abs(av.value - direct.value) < tol


class TestRegularity:
    def test_monotonicity_zero(self, f_zero, freq1):
        rep = check_ln_monotonicity(f_zero, freq1, SpectralPoint(0.5),
                                    [10, 20, 40], 10, seed=0)
        assert rep.ok
        assert all(e.value == pytest.approx(0.0, abs=1e-12)
                   for e in rep.estimates.values())

    def test_monotonicity_floquet(self, f_const, freq1):
        rep = check_ln_monotonicity(f_const, freq1, SpectralPoint(0.0),
                                    [10, 20, 40, 80], 40, seed=1)
        assert rep.ok

    def test_monotonicity_snapshot(self, f_two_mode, freq2):
        rep = check_ln_monotonicity(f_two_mode, freq2, SpectralPoint(1.0),
                                    [8, 16, 32, 64], 60, seed=2)
        assert rep.ok
        assert rep.fitted_c >= 0.0

    def test_strip_zero_displacement(self, f_two_mode, freq2):
        rep = strip_continuity_check(f_two_mode, freq2, SpectralPoint(1.0), 20,
                                     [(0.0, 0.0)], samples=10, seed=0)
        assert rep.max_ratio == 0.0

    def test_strip_zero_function(self, freq1, f_zero):
        y = f_zero.strip_width / 8
        rep = strip_continuity_check(f_zero, freq1, SpectralPoint(0.7), 30,
                                     [(y,)], samples=10, seed=0)
        assert rep.max_ratio == pytest.approx(0.0, abs=1e-10)

    def test_strip_ratio_stable_in_n(self, f_two_mode, freq2):
        z = SpectralPoint(1.0)
        y = (min(1e-3, f_two_mode.strip_width / 4), 0.0)
        ratios = []
        for n in (20, 40, 80):
            rep = strip_continuity_check(f_two_mode, freq2, z, n, [y],
                                         samples=40, seed=1)
            ratios.append(rep.max_ratio)
        assert max(ratios) < 2.5 * max(min(ratios), 1e-6) + 1.0

    def test_strip_rejects_wide_y(self, f_two_mode, freq2):
        with pytest.raises(ValueError):
            strip_continuity_check(f_two_mode, freq2, SpectralPoint(1.0), 10,
                                   [(f_two_mode.strip_width, 0.0)], samples=2,
                                   seed=0)

    def test_uniform_upper_zero(self, f_zero, freq1):
        rep = uniform_upper_check(f_zero, freq1, SpectralPoint(0.3), 20, grid=32)
        assert rep.excess == pytest.approx(0.0, abs=1e-10)

    def test_uniform_upper_constant_exact(self, f_const, freq1):
        n = 64
        rep = uniform_upper_check(f_const, freq1, SpectralPoint(0.0), n, grid=32)
        # single-matrix powers: norm is x-independent, so excess vanishes
        m = cocycle_step(f_const, SpectralPoint(0.0), Phase((0.0,)))
        power = np.linalg.matrix_power(m, n)
        assert rep.sup_log_norm == pytest.approx(np.log(np.linalg.norm(power, 2)),
                                                 abs=1e-8)
        assert rep.excess == pytest.approx(0.0, abs=1e-10)

    def test_uniform_upper_sublinear_trend(self, f_two_mode, freq2):
        z = SpectralPoint(1.0)
        e1 = uniform_upper_check(f_two_mode, freq2, z, 16, grid=32).excess
        e2 = uniform_upper_check(f_two_mode, freq2, z, 64, grid=32).excess
        assert e2 < 4.0 * max(e1, 0.2)   # growth clearly below linear (x4)

    def test_uniform_upper_rejects_coarse_grid(self, f_zero, freq1):
        with pytest.raises(ValueError):
            uniform_upper_check(f_zero, freq1, SpectralPoint(0.0), 10, grid=16)
