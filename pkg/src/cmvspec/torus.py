"""Torus phases, Diophantine frequencies, and analytic sampling functions.

A sampling function is a finite Fourier series on the d-torus taking values
in the open unit disk; it generates the Verblunsky coefficients of the
operators built elsewhere through evaluation along a rotation orbit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .util import counter_rng


# --------------------------------------------------------------------------
# phases


@dataclass(frozen=True)
class Phase:
    """Point of the d-torus, optionally displaced into the analyticity strip.

    Real coordinates are stored reduced into [0, 1); ``imag`` is an additive
    imaginary displacement (one entry per coordinate).
    """

    coords: tuple[float, ...]
    imag: tuple[float, ...] | None = None

    @property
    def dim(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def imag_array(self) -> np.ndarray:
        if self.imag is None:
            return np.zeros(len(self.coords))
        return np.asarray(self.imag, dtype=float)

    def shift(self, delta) -> "Phase":
        return reduce_phase(self.array() + np.asarray(delta, dtype=float), imag=self.imag)


def reduce_phase(raw, imag=None) -> Phase:
    """Reduce coordinates mod 1 into [0,1) and wrap them in a Phase."""
    arr = np.atleast_1d(np.asarray(raw, dtype=float)) % 1.0
    # -1e-18 % 1.0 == 1.0 on some platforms; force the half-open interval
    arr = np.where(arr >= 1.0, 0.0, arr)
    im = None if imag is None else tuple(float(v) for v in np.atleast_1d(imag))
    return Phase(coords=tuple(float(v) for v in arr), imag=im)


def random_phase(dim: int, seed: int, counter: int = 0) -> Phase:
    """Uniform phase drawn from the (seed, counter) stream."""
    return Phase(tuple(counter_rng(seed, counter).random(dim)))


# --------------------------------------------------------------------------
# frequencies


@dataclass(frozen=True)
class DiophantineCertificate:
    ok: bool
    worst_k: tuple[int, ...]
    worst_ratio: float
    p: float
    q: float
    k_max: int


def _dist_to_integer(x: np.ndarray) -> np.ndarray:
    f = x % 1.0
    return np.minimum(f, 1.0 - f)


def check_diophantine(omega, p: float, q: float, k_max: int) -> DiophantineCertificate:
    """Exhaustively certify ||k.omega|| >= p/|k|^q for 0 < |k|_1 <= k_max.

    ``worst_k`` minimizes ||k.omega|| * |k|^q; ok means that minimum is >= p.
    Only half of each symmetric pair (k, -k) is scanned.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    d = len(omega)
    if p <= 0:
        raise ValueError("p must be positive")
    if q <= d:
        raise ValueError(f"q must exceed the dimension d={d}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")

    best_ratio = np.inf
    best_k: tuple[int, ...] = (0,) * d
    if d == 1:
        k = np.arange(1, k_max + 1)
        ratio = _dist_to_integer(k * omega[0]) * k.astype(float) ** q
        i = int(np.argmin(ratio))
        best_ratio, best_k = float(ratio[i]), (int(k[i]),)
    elif d == 2:
        # scan k1 >= 1 plus the ray k1 = 0, k2 >= 1; |k|_1 <= k_max
        for k1 in range(0, k_max + 1):
            lim = k_max - k1
            if k1 == 0:
                k2 = np.arange(1, lim + 1)
            else:
                k2 = np.arange(-lim, lim + 1)
            if len(k2) == 0:
                continue
            norm = (k1 + np.abs(k2)).astype(float)
            ratio = _dist_to_integer(k1 * omega[0] + k2 * omega[1]) * norm ** q
            i = int(np.argmin(ratio))
            if ratio[i] < best_ratio:
                best_ratio, best_k = float(ratio[i]), (k1, int(k2[i]))
    else:
        # generic dimension: odometer over the l1 ball, first nonzero coord > 0
        def rec(prefix, remaining):
            nonlocal best_ratio, best_k
            if len(prefix) == d - 1:
                lo = 1 if all(v == 0 for v in prefix) else -remaining
                k_last = np.arange(lo, remaining + 1)
                if len(k_last) == 0:
                    return
                dot = sum(v * w for v, w in zip(prefix, omega[:-1])) + k_last * omega[-1]
                norm = (sum(abs(v) for v in prefix) + np.abs(k_last)).astype(float)
                norm[norm == 0] = np.inf
                ratio = _dist_to_integer(dot) * norm ** q
                i = int(np.argmin(ratio))
                if ratio[i] < best_ratio:
                    best_ratio, best_k = float(ratio[i]), (*prefix, int(k_last[i]))
                return
            first = all(v == 0 for v in prefix)
            for v in range(0 if first else -remaining, remaining + 1):
                rec((*prefix, v), remaining - abs(v))
        rec((), k_max)

    return DiophantineCertificate(ok=bool(best_ratio >= p), worst_k=best_k,
                                  worst_ratio=best_ratio, p=p, q=q, k_max=k_max)


@dataclass(frozen=True)
class Frequency:
    """Frequency vector with a finite Diophantine certificate."""

    coords: tuple[float, ...]
    dioph_p: float
    dioph_q: float
    cutoff: int
    certificate: DiophantineCertificate = field(compare=False, repr=False, default=None)

    @classmethod
    def checked(cls, omega, p: float, q: float, k_max: int = 200) -> "Frequency":
        cert = check_diophantine(omega, p, q, k_max)
        if not cert.ok:
            raise ValueError(
                f"Diophantine check failed: worst k={cert.worst_k} "
                f"ratio={cert.worst_ratio:.3e} < p={p}")
        coords = tuple(float(v) % 1.0 for v in np.atleast_1d(omega))
        return cls(coords=coords, dioph_p=p, dioph_q=q, cutoff=k_max, certificate=cert)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


# --------------------------------------------------------------------------
# sampling functions


class SamplingFunction:
    """Finite Fourier series alpha: T^d -> D with a certified sup bound.

    The certificate evaluates |alpha| on a grid of ``grid`` points per
    dimension and adds a Lipschitz slack covering the grid cells, so
    ``sup_bound`` genuinely dominates sup |alpha| on the real torus.  The
    strip half-width ``h`` is shrunk, if necessary, until the crude bound
    sum |c_k| exp(pi h |k|_1) stays below 1, which keeps evaluation on
    T^d_{h/2} inside the disk.
    """

    def __init__(self, dim: int, coeffs: dict, strip_width: float | None = None,
                 grid: int = 64):
        self.dim = int(dim)
        self.coeffs = {tuple(int(i) for i in k): complex(c)
                       for k, c in coeffs.items() if c != 0}
        self._ks = np.array(sorted(self.coeffs), dtype=int).reshape(-1, self.dim) \
            if self.coeffs else np.zeros((0, self.dim), dtype=int)
        self._cs = np.array([self.coeffs[tuple(k)] for k in self._ks], dtype=complex)
        self._verify_grid = int(grid)
        self.sup_bound = self._certify_sup(grid)
        if self.sup_bound >= 1.0:
            raise ValueError(f"certified sup bound {self.sup_bound:.6f} is not < 1")
        self.strip_width = self._fit_strip(strip_width)

    # -- certification ----------------------------------------------------
    def _lipschitz(self) -> float:
        if len(self._cs) == 0:
            return 0.0
        return float(2 * np.pi * np.sum(np.abs(self._cs)
                                        * np.abs(self._ks).sum(axis=1)))

    def _certify_sup(self, grid: int) -> float:
        if len(self._cs) == 0:
            return 0.0
        axes = [np.arange(grid) / grid] * self.dim
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        vals = np.abs(np.exp(2j * np.pi * (mesh @ self._ks.T)) @ self._cs)
        slack = self._lipschitz() * 0.5 / grid
        return float(vals.max() + slack)

    def _fit_strip(self, requested: float | None) -> float:
        if len(self._cs) == 0:
            return requested if requested is not None else 1.0
        k1 = np.abs(self._ks).sum(axis=1)
        target = 0.5 * (1.0 + self.sup_bound)

        def strip_sum(h):
            return float(np.sum(np.abs(self._cs) * np.exp(np.pi * h * k1)))

        h = requested if requested is not None else 1.0
        while strip_sum(h) > max(target, strip_sum(0.0)) and h > 1e-9:
            h *= 0.5
        if requested is not None and h < requested:
            # honour an explicit request only when it is actually safe
            raise ValueError(
                f"strip width {requested} not certifiable; largest safe value ~{h:.3g}")
        return h

    # -- evaluation --------------------------------------------------------
    def alpha(self, x: Phase) -> complex:
        """alpha(x + iy) = sum c_k exp(2 pi i k.(x+iy))."""
        if len(self._cs) == 0:
            return 0j
        xr = x.array()
        kx = self._ks @ xr
        if x.imag is not None:
            y = x.imag_array()
            if float(np.max(np.abs(y))) >= self.strip_width:
                raise ValueError("phase leaves the analyticity strip")
            return complex(np.sum(self._cs * np.exp(2j * np.pi * kx
                                                    - 2 * np.pi * (self._ks @ y))))
        return complex(np.sum(self._cs * np.exp(2j * np.pi * kx)))

    def alpha_bar(self, x: Phase) -> complex:
        """Analytic continuation of conj(alpha): conj(alpha(x - iy))."""
        if x.imag is None:
            return np.conj(self.alpha(x))
        flipped = Phase(x.coords, tuple(-v for v in x.imag))
        return np.conj(self.alpha(flipped))

    def rho(self, x: Phase) -> float:
        """rho(x) = sqrt(1 - |alpha(x)|^2) on the real torus."""
        if x.imag is not None and any(v != 0 for v in x.imag):
            raise ValueError("rho is defined for real phases; use rho_strip")
        a = self.alpha(x)
        return float(np.sqrt(1.0 - (a.real * a.real + a.imag * a.imag)))

    def rho_strip(self, x: Phase) -> complex:
        """Analytic square root of 1 - alpha(x+iy)*alpha_bar(x+iy).

        Coincides with rho on the real torus; principal branch (the radicand
        has positive real part whenever |alpha| stays below 1 on the strip).
        """
        rad = 1.0 - self.alpha(x) * self.alpha_bar(x)
        return complex(np.sqrt(rad))

    def alpha_orbit(self, x0: Phase, omega, n: int, y=None) -> np.ndarray:
        """Vector of alpha(x0 + j*omega + iy) for j = 0..n-1."""
        om = omega.array() if isinstance(omega, Frequency) else np.asarray(omega, float)
        if len(self._cs) == 0:
            return np.zeros(n, dtype=complex)
        j = np.arange(n)
        ph = 2j * np.pi * (np.outer(j, self._ks @ om) + self._ks @ x0.array())
        if y is not None:
            ph = ph - 2 * np.pi * (self._ks @ np.asarray(y, float))
        return np.exp(ph) @ self._cs

    @property
    def degree(self) -> int:
        if len(self._ks) == 0:
            return 0
        return int(np.abs(self._ks).sum(axis=1).max())

    # -- serialization -----------------------------------------------------
    def to_json(self) -> str:
        items = [{"k": list(map(int, k)), "re": float(c.real), "im": float(c.imag)}
                 for k, c in sorted(self.coeffs.items())]
        return json.dumps({"dim": self.dim, "h": self.strip_width, "coeffs": items})

    @classmethod
    def from_json(cls, text: str) -> "SamplingFunction":
        data = json.loads(text)
        coeffs = {tuple(item["k"]): complex(item["re"], item["im"])
                  for item in data["coeffs"]}
        return cls(dim=data["dim"], coeffs=coeffs, strip_width=data.get("h"))


def eval_alpha(f: SamplingFunction, x: Phase) -> complex:
    return f.alpha(x)


def eval_rho(f: SamplingFunction, x: Phase) -> float:
    return f.rho(x)


# --------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class TruncationResult:
    function: SamplingFunction
    error_bound: float
    achieved: bool
    target: float


def truncate_fourier(f: SamplingFunction, n: int) -> TruncationResult:
    """Drop Fourier modes of total degree >= n^4.

    The reported bound is the absolute-coefficient tail sum, which dominates
    the sup-norm error.  ``achieved`` records whether the bound meets the
    exp(-n^2) target expected of coefficients with geometric decay.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    cut = n ** 4
    kept = {k: c for k, c in f.coeffs.items() if sum(map(abs, k)) < cut}
    dropped = sum(abs(c) for k, c in f.coeffs.items() if sum(map(abs, k)) >= cut)
    g = SamplingFunction(f.dim, kept, strip_width=None, grid=f._verify_grid)
    target = float(np.exp(-float(n) ** 2))
    return TruncationResult(function=g, error_bound=float(dropped),
                            achieved=bool(dropped <= target), target=target)


def orbit(x0: Phase, omega, n: int) -> list[Phase]:
    """Rotation orbit x0, x0+w, ..., x0+(n-1)w, reduced mod 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    om = omega.array() if isinstance(omega, Frequency) else np.asarray(omega, float)
    base = x0.array()
    return [reduce_phase(base + j * om, imag=x0.imag) for j in range(n)]
