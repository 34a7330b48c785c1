import numpy as np
import pytest

from cmvspec.cmv import (VerblunskySequence, apply_cmv, build_finite_cmv,
                         cmv_row_window, theta_block)
from cmvspec.torus import Phase, SamplingFunction
from cmvspec.presets import zero_function

from conftest import random_unit


class TestThetaBlock:
    def test_swap_matrix(self):
        assert np.array_equal(theta_block(0.0), np.array([[0, 1], [1, 0]]))

    def test_boundary_value(self):
        b = theta_block(1.0)
        assert np.allclose(b, np.array([[1, 0], [0, -1]]))

    def test_three_four_five(self):
        b = theta_block(0.6j)
        assert np.allclose(b, np.array([[-0.6j, 0.8], [0.8, -0.6j]]))

    def test_unitary(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = rng.random() * np.exp(2j * np.pi * rng.random())
            b = theta_block(a)
            assert np.max(np.abs(b.conj().T @ b - np.eye(2))) < 1e-14

    def test_rejects_outside_disk(self):
        with pytest.raises(ValueError):
            theta_block(1.5)


def reference_dense_assembly(values: dict, a: int, b: int) -> np.ndarray:
    """Slow independent assembler: dense block factors multiplied directly.

    values must cover sites [a-1, b] with boundary replacements already
    applied; rho is recomputed per site.
    """
    n = b - a + 1
    L = np.zeros((n, n), dtype=complex)
    M = np.zeros((n, n), dtype=complex)
    for n0 in range(a - 1, b + 1):
        al = values[n0]
        rh = np.sqrt(max(0.0, 1.0 - abs(al) ** 2))
        blk = np.array([[np.conj(al), rh], [rh, -al]])
        T = L if n0 % 2 == 0 else M
        for di in range(2):
            for dj in range(2):
                i, j = n0 + di, n0 + dj
                if a <= i <= b and a <= j <= b:
                    T[i - a, j - a] += blk[di, dj]
    return L @ M


@pytest.fixture(scope="module")
def seq(freq2, f_two_mode):
    return VerblunskySequence(f_two_mode, freq2, Phase((0.13, 0.71)))


class TestBuildFiniteCMV:
    def test_free_case_entries(self, freq2):
        f0 = zero_function(2)
        s = VerblunskySequence(f0, freq2, Phase((0.0, 0.0)))
        m = build_finite_cmv(s, 0, 3, beta=1.0, eta=1.0)
        E = m.dense()
        assert np.max(np.abs(E.conj().T @ E - np.eye(4))) < 1e-14
        vals = np.unique(np.round(E.real, 12))
        assert set(vals).issubset({-1.0, 0.0, 1.0})
        assert np.max(np.abs(E.imag)) == 0.0

    def test_unitarity_random(self, seq):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = int(rng.integers(-30, 30))
            b = a + int(rng.integers(0, 60))
            beta, eta = random_unit(rng), random_unit(rng)
            m = build_finite_cmv(seq, a, b, beta=beta, eta=eta)
            E = m.dense()
            n = m.size
            assert np.max(np.abs(E.conj().T @ E - np.eye(n))) <= 1e-12

    def test_matches_reference_assembler(self, seq):
        a, b = 0, 20
        values = {n: seq.value(n) for n in range(a - 2, b + 2)}
        values[a - 1] = 1.0 + 0j
        values[b] = 1.0 + 0j
        ref = reference_dense_assembly(values, a, b)
        E = build_finite_cmv(seq, a, b, beta=1.0, eta=1.0).dense()
        assert np.max(np.abs(E - ref)) < 1e-14

    def test_factorization(self, seq):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = int(rng.integers(-20, 10))
            b = a + int(rng.integers(0, 40))
            beta, eta = random_unit(rng), random_unit(rng)
            m = build_finite_cmv(seq, a, b, beta=beta, eta=eta)
            E = m.dense()
            assert np.max(np.abs(E - m.l_dense() @ m.m_dense())) <= 1e-13

    def test_pentadiagonal(self, seq):
        m = build_finite_cmv(seq, 0, 30)
        E = m.dense()
        for i in range(31):
            for j in range(31):
                if abs(i - j) > 2:
                    assert E[i, j] == 0

    def test_single_site(self, seq):
        beta, eta = np.exp(0.3j), np.exp(-0.7j)
        m = build_finite_cmv(seq, 5, 5, beta=beta, eta=eta)
        assert m.dense()[0, 0] == pytest.approx(-np.conj(eta) * beta)

    def test_shift_covariance(self, seq, freq2, f_two_mode):
        # parity-preserving shift: the block pattern is 2-periodic in the
        # site index, so covariance holds entrywise for even translations
        shifted = VerblunskySequence(f_two_mode, freq2, seq.phase_at(2))
        m1 = build_finite_cmv(seq, 2, 22, beta=np.exp(0.2j), eta=np.exp(1.1j))
        m2 = build_finite_cmv(shifted, 0, 20, beta=np.exp(0.2j), eta=np.exp(1.1j))
        assert np.max(np.abs(m1.dense() - m2.dense())) < 1e-13

    def test_rejects_non_unit_boundary(self, seq):
        with pytest.raises(ValueError):
            build_finite_cmv(seq, 0, 5, beta=0.5, eta=1.0)

    def test_overrides_must_be_unimodular(self, freq2, f_two_mode):
        with pytest.raises(ValueError):
            VerblunskySequence(f_two_mode, freq2, Phase((0.1, 0.2)),
                               overrides={3: 0.7})


class TestApply:
    def test_basis_vector(self, seq):
        m = build_finite_cmv(seq, 0, 10)
        E = m.dense()
        e0 = np.zeros(11, dtype=complex)
        e0[0] = 1.0
        assert np.allclose(apply_cmv(m, e0), E[:, 0])

    def test_zero_vector(self, seq):
        m = build_finite_cmv(seq, 0, 10)
        assert np.all(apply_cmv(m, np.zeros(11)) == 0)

    def test_dense_multiply_oracle(self, seq):
        m = build_finite_cmv(seq, -5, 44)
        E = m.dense()
        rng = np.random.default_rng(7)
        for _ in range(10):
            v = rng.standard_normal(50) + 1j * rng.standard_normal(50)
            assert np.max(np.abs(apply_cmv(m, v) - E @ v)) <= 1e-13 * np.max(np.abs(v))

    def test_dimension_mismatch(self, seq):
        m = build_finite_cmv(seq, 0, 10)
        with pytest.raises(ValueError):
            apply_cmv(m, np.zeros(5))


class TestRowWindow:
    def test_free_case(self, freq2):
        f0 = zero_function(2)
        s = VerblunskySequence(f0, freq2, Phase((0.0, 0.0)))
        W = cmv_row_window(s, 0, 3)
        # all rho = 1: entries are 0 or 1, one pair-swap target per row
        assert set(np.unique(np.round(W.real, 12))).issubset({0.0, 1.0})
        assert np.allclose(np.abs(W).sum(axis=1), 1.0)

    def test_constant_alpha_display_pattern(self, freq2):
        # constant alpha: diagonal entries are -conj(a) a for every row
        a = 0.4 + 0.2j
        f = SamplingFunction(2, {(0, 0): a})
        s = VerblunskySequence(f, freq2, Phase((0.0, 0.0)))
        W = cmv_row_window(s, 4, 2)
        rows = np.arange(2, 7)
        for i, n in enumerate(rows):
            assert W[i, n - 2 + 2] == pytest.approx(-np.conj(a) * a)

    def test_interior_consistency_with_truncation(self, seq):
        center, w = 8, 3
        W = cmv_row_window(seq, center, w)
        m = build_finite_cmv(seq, center - w - 4, center + w + 4)
        E = m.dense()
        for i, n in enumerate(range(center - w, center + w + 1)):
            for j, col in enumerate(range(center - w - 2, center + w + 3)):
                assert W[i, j] == pytest.approx(
                    E[n - (center - w - 4), col - (center - w - 4)], abs=1e-15)

    def test_rejects_small_width(self, seq):
        with pytest.raises(ValueError):
            cmv_row_window(seq, 0, 1)


def test_interior_rows_of_truncation_match_extended(seq):
    m = build_finite_cmv(seq, 0, 20, beta=np.exp(2.2j), eta=np.exp(0.4j))
    E = m.dense()
    W = cmv_row_window(seq, 10, 5)   # rows 5..15, cols 3..17
    for i, n in enumerate(range(5, 16)):
        for j, col in enumerate(range(3, 18)):
            assert E[n, col] == pytest.approx(W[i, j], abs=1e-15)


def test_csv_export(tmp_path, seq):
    m = build_finite_cmv(seq, 0, 6)
    path = tmp_path / "cmv.csv"
    m.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "row,col,re,im"
    E = m.dense()
    for line in lines[1:]:
        r, c, re, im = line.split(",")
        assert E[int(r), int(c)] == complex(float(re), float(im))
