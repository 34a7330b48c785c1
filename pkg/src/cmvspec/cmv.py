"""Five-diagonal unitary operators from Verblunsky coefficients.

The doubly-infinite operator factors as E = L M with L carrying the 2x2
rotation blocks at even positions and M at odd positions.  Finite windows
[a, b] become unitary after replacing the coefficients at sites a-1 and b
by unimodular boundary values, which decouples the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .torus import Frequency, Phase, SamplingFunction, reduce_phase


def theta_block(alpha_n: complex) -> np.ndarray:
    """2x2 unitary [[conj(a), r], [r, -a]] with r = sqrt(1-|a|^2); needs |a| <= 1."""
    a = complex(alpha_n)
    mod2 = a.real * a.real + a.imag * a.imag
    if mod2 > 1.0 + 1e-12:
        raise ValueError(f"|alpha|={np.sqrt(mod2):.6f} exceeds 1")
    r = np.sqrt(max(0.0, 1.0 - mod2))
    return np.array([[np.conj(a), r], [r, -a]], dtype=complex)


class VerblunskySequence:
    """Coefficients alpha_n = alpha(x + n w), with optional unimodular overrides.

    Values are cached per site; overrides replace the sampled value exactly
    and must have unit modulus (they represent boundary conditions).
    """

    def __init__(self, sampling: SamplingFunction, frequency, base: Phase,
                 overrides: dict | None = None):
        self.sampling = sampling
        self.omega = (frequency.array() if isinstance(frequency, Frequency)
                      else np.asarray(frequency, dtype=float))
        self.frequency = frequency if isinstance(frequency, Frequency) else None
        self.base = base
        self.overrides = {}
        if overrides:
            for n, v in overrides.items():
                self.set_override(int(n), v)
        self._cache: dict[int, complex] = {}

    def set_override(self, n: int, value: complex) -> None:
        v = complex(value)
        if abs(abs(v) - 1.0) > 1e-12:
            raise ValueError(f"override at {n} must be unimodular, got |v|={abs(v)}")
        self.overrides[n] = v

    def with_overrides(self, overrides: dict) -> "VerblunskySequence":
        seq = VerblunskySequence(self.sampling, self.frequency or self.omega,
                                 self.base, overrides=None)
        seq.overrides = dict(self.overrides)
        for n, v in overrides.items():
            seq.set_override(int(n), v)
        seq._cache = self._cache
        return seq

    def phase_at(self, n: int) -> Phase:
        return reduce_phase(self.base.array() + n * self.omega, imag=self.base.imag)

    def raw_value(self, n: int) -> complex:
        """Sampled value alpha(x + n w), ignoring overrides."""
        if n not in self._cache:
            self._cache[n] = self.sampling.alpha(self.phase_at(n))
        return self._cache[n]

    def value(self, n: int) -> complex:
        if n in self.overrides:
            return self.overrides[n]
        return self.raw_value(n)

    def rho(self, n: int) -> float:
        """sqrt(1-|alpha_n|^2) of the effective value (0 at overridden sites)."""
        a = self.value(n)
        return float(np.sqrt(max(0.0, 1.0 - (a.real ** 2 + a.imag ** 2))))

    def raw_rho(self, n: int) -> float:
        a = self.raw_value(n)
        return float(np.sqrt(max(0.0, 1.0 - (a.real ** 2 + a.imag ** 2))))

    def log_rho_sum(self, a: int, b: int) -> float:
        """sum of log rho_n over the window, from the unmodified sampling."""
        return float(sum(np.log(self.raw_rho(n)) for n in range(a, b + 1)))

    def shifted(self, steps: int) -> "VerblunskySequence":
        """Sequence based at x + steps*w; value(n) equals self.value(n+steps)."""
        return VerblunskySequence(self.sampling, self.frequency or self.omega,
                                  self.phase_at(steps))


@dataclass
class FiniteCMV:
    """Unitary window E^{beta,eta}_{[a,b]} in pentadiagonal storage.

    ``bands[off+2]`` holds diagonal ``off`` (off = -2..2) aligned so that
    entry (i, i+off) sits at band index i for 0 <= i, i+off < n.  ``lfactor``
    and ``mfactor`` list (start, block) pairs; ``start`` is the row of the
    window (0-based) where the 2x2 or scalar block begins.
    """

    a: int
    b: int
    beta: complex
    eta: complex
    bands: np.ndarray
    lfactor: list = field(repr=False)
    mfactor: list = field(repr=False)

    @property
    def size(self) -> int:
        return self.b - self.a + 1

    def dense(self) -> np.ndarray:
        n = self.size
        E = np.zeros((n, n), dtype=complex)
        for off in range(-2, 3):
            d = self.bands[off + 2]
            for i in range(n):
                j = i + off
                if 0 <= j < n:
                    E[i, j] = d[i]
        return E

    @staticmethod
    def _factor_dense(n: int, blocks: list) -> np.ndarray:
        F = np.zeros((n, n), dtype=complex)
        for start, blk in blocks:
            if np.isscalar(blk) or np.ndim(blk) == 0:
                F[start, start] = blk
            else:
                F[start:start + 2, start:start + 2] = blk
        return F

    def l_dense(self) -> np.ndarray:
        return self._factor_dense(self.size, self.lfactor)

    def m_dense(self) -> np.ndarray:
        return self._factor_dense(self.size, self.mfactor)

    def zlstar_minus_m_banded(self, z: complex) -> np.ndarray:
        """Tridiagonal z L* - M in solve_banded layout (ab[1+i-j, j])."""
        n = self.size
        ab = np.zeros((3, n), dtype=complex)
        for start, blk in self.lfactor:
            if np.isscalar(blk) or np.ndim(blk) == 0:
                ab[1, start] += z * np.conj(blk)
            else:
                B = z * blk.conj().T
                ab[1, start] += B[0, 0]
                ab[1, start + 1] += B[1, 1]
                ab[0, start + 1] += B[0, 1]
                ab[2, start] += B[1, 0]
        for start, blk in self.mfactor:
            if np.isscalar(blk) or np.ndim(blk) == 0:
                ab[1, start] -= blk
            else:
                ab[1, start] -= blk[0, 0]
                ab[1, start + 1] -= blk[1, 1]
                ab[0, start + 1] -= blk[0, 1]
                ab[2, start] -= blk[1, 0]
        return ab

    def to_csv(self, path) -> None:
        """Dense entries as "row,col,re,im" rows (nonzeros only)."""
        from .util import format_float
        lines = ["row,col,re,im"]
        n = self.size
        for off in range(-2, 3):
            for i in range(n):
                j = i + off
                if 0 <= j < n and self.bands[off + 2][i] != 0:
                    v = self.bands[off + 2][i]
                    lines.append(f"{i},{j},{format_float(v.real)},{format_float(v.imag)}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _window_values(seq: VerblunskySequence, a: int, b: int,
                   beta: complex | None, eta: complex | None):
    """Effective alpha and rho on sites [a-1, b], applying the window boundary.

    ``None`` keeps the sampled coefficient (non-unitary pure truncation).
    """
    al = {}
    for n in range(a - 2, b + 2):
        if n == a - 1 and beta is not None:
            al[n] = complex(beta)
        elif n == b and eta is not None:
            al[n] = complex(eta)
        else:
            al[n] = seq.value(n)
    rh = {n: float(np.sqrt(max(0.0, 1.0 - abs(v) ** 2))) for n, v in al.items()}
    return al, rh


def build_finite_cmv(seq: VerblunskySequence, a: int, b: int,
                     beta: complex = 1.0 + 0j, eta: complex = 1.0 + 0j,
                     _allow_natural: bool = False) -> FiniteCMV:
    """Assemble E^{beta,eta}_{[a,b]} with its L and M factors.

    beta/eta must be unimodular; passing None keeps the sampled coefficient
    at the corresponding cut (producing the non-unitary pure truncation used
    by determinant identities) and requires ``_allow_natural``.
    """
    if a > b:
        raise ValueError("need a <= b")
    for name, v in (("beta", beta), ("eta", eta)):
        if v is None:
            if not _allow_natural:
                raise ValueError(f"{name}=None requires _allow_natural=True")
        elif abs(abs(complex(v)) - 1.0) > 1e-12:
            raise ValueError(f"|{name}| must be 1, got {abs(complex(v))}")

    al, rh = _window_values(seq, a, b, beta, eta)
    n = b - a + 1
    bands = np.zeros((5, n), dtype=complex)

    def put(i: int, j: int, v: complex) -> None:
        if a <= j <= b:
            bands[j - i + 2][i - a] = v

    for i in range(a, b + 1):
        put(i, i, -np.conj(al[i]) * al[i - 1])
        if i % 2 == 0:
            put(i, i - 1, np.conj(al[i]) * rh[i - 1])
            put(i, i + 1, np.conj(al[i + 1]) * rh[i])
            put(i, i + 2, rh[i + 1] * rh[i])
        else:
            put(i, i - 2, rh[i - 1] * rh[i - 2])
            put(i, i - 1, -rh[i - 1] * al[i - 2])
            put(i, i + 1, -rh[i] * al[i - 1])

    lfac, mfac = [], []
    for n0 in range(a - 1, b + 1):
        target = lfac if n0 % 2 == 0 else mfac
        blk = np.array([[np.conj(al[n0]), rh[n0]], [rh[n0], -al[n0]]], dtype=complex)
        if n0 >= a and n0 + 1 <= b:
            target.append((n0 - a, blk))
        elif n0 == a - 1:
            target.append((0, blk[1, 1]))          # scalar -alpha_{a-1}
        elif n0 == b:
            target.append((n0 - a, blk[0, 0]))     # scalar conj(alpha_b)
    return FiniteCMV(a=a, b=b, beta=beta, eta=eta, bands=bands,
                     lfactor=lfac, mfactor=mfac)


def build_cut_cmv(seq: VerblunskySequence, a: int, b: int) -> FiniteCMV:
    """Pure projection P E P* with unmodified coefficients (not unitary)."""
    return build_finite_cmv(seq, a, b, beta=None, eta=None, _allow_natural=True)


def apply_cmv(m: FiniteCMV, v: np.ndarray) -> np.ndarray:
    """Banded matrix-vector product."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (m.size,):
        raise ValueError(f"vector length {v.shape} != window size {m.size}")
    out = np.zeros(m.size, dtype=complex)
    n = m.size
    for off in range(-2, 3):
        d = m.bands[off + 2]
        i0, i1 = max(0, -off), min(n, n - off)
        if i0 < i1:
            out[i0:i1] += d[i0:i1] * v[i0 + off:i1 + off]
    return out


def cmv_row_window(seq: VerblunskySequence, center: int, halfwidth: int) -> np.ndarray:
    """Rows [center-w, center+w] of the doubly-infinite operator.

    Columns cover [center-w-2, center+w+2]; no boundary modification.
    """
    if halfwidth < 2:
        raise ValueError("halfwidth must be >= 2")
    lo, hi = center - halfwidth, center + halfwidth
    al = {n: seq.value(n) for n in range(lo - 3, hi + 3)}
    rh = {n: float(np.sqrt(max(0.0, 1.0 - abs(v) ** 2))) for n, v in al.items()}
    rows = hi - lo + 1
    cols = rows + 4
    E = np.zeros((rows, cols), dtype=complex)

    def put(i: int, j: int, v: complex) -> None:
        E[i - lo, j - (lo - 2)] = v

    for i in range(lo, hi + 1):
        put(i, i, -np.conj(al[i]) * al[i - 1])
        if i % 2 == 0:
            put(i, i - 1, np.conj(al[i]) * rh[i - 1])
            put(i, i + 1, np.conj(al[i + 1]) * rh[i])
            put(i, i + 2, rh[i + 1] * rh[i])
        else:
            put(i, i - 2, rh[i - 1] * rh[i - 2])
            put(i, i - 1, -rh[i - 1] * al[i - 2])
            put(i, i + 1, -rh[i] * al[i - 1])
    return E
