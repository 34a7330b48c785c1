"""Eigen-decomposition of unitary windows and eigenvector diagnostics.

The pentadiagonal windows are normal matrices, so a complex Schur
factorization delivers an orthonormal eigenbasis directly (the triangular
factor is numerically diagonal).  Eigenvalues are projected onto the circle
and pairs are ordered by phase; eigenvector gauge fixes the first
largest-magnitude entry to be real positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .cmv import FiniteCMV
from .util import phase_of

DEFAULT_MAX_DIM = 4096


@dataclass
class EigenPair:
    index: int
    value: complex            # unit modulus after projection
    vector: np.ndarray
    residual: float
    raw_modulus: float        # |eigenvalue| before projection, health metric

    @property
    def theta(self) -> float:
        return phase_of(self.value)


def _gauge(vec: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(vec)))
    pivot = vec[k]
    if pivot == 0:
        return vec
    return vec * (np.conj(pivot) / abs(pivot))


def eigensolve(m, max_dim: int = DEFAULT_MAX_DIM) -> list[EigenPair]:
    """Complete eigen-decomposition, ordered by eigenvalue phase.

    Accepts a FiniteCMV window or a dense (near-)unitary matrix.  Raises if
    the decomposition degrades (residuals above 1e-10), reporting a content
    hash of the offending matrix.
    """
    A = m.dense() if isinstance(m, FiniteCMV) else np.asarray(m, dtype=complex)
    n = A.shape[0]
    if n > max_dim:
        raise ValueError(f"window size {n} exceeds max_dim={max_dim}")
    if n == 1:
        lam = complex(A[0, 0])
        value = lam / abs(lam)
        return [EigenPair(index=0, value=value, vector=np.ones(1, dtype=complex),
                          residual=abs(lam - value), raw_modulus=abs(lam))]
    T, Z = schur(A, output="complex")
    w = np.diag(T).copy()
    residuals = np.array([np.linalg.norm(A @ Z[:, k] - w[k] * Z[:, k])
                          for k in range(n)])
    if residuals.max() > 1e-10:
        import hashlib
        digest = hashlib.sha256(A.tobytes()).hexdigest()[:16]
        raise RuntimeError(
            f"eigensolve residual {residuals.max():.2e} exceeds 1e-10 "
            f"(matrix sha256 {digest})")
    order = np.argsort(np.angle(w) % (2 * np.pi), kind="stable")
    pairs = []
    for rank, k in enumerate(order):
        lam = w[k]
        mod = abs(lam)
        pairs.append(EigenPair(index=rank, value=lam / mod,
                               vector=_gauge(Z[:, k].copy()),
                               residual=float(residuals[k]), raw_modulus=float(mod)))
    return pairs


def eigenphases(m, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Unit-circle eigenvalues only (no vectors), sorted by phase."""
    A = m.dense() if isinstance(m, FiniteCMV) else np.asarray(m, dtype=complex)
    if A.shape[0] > max_dim:
        raise ValueError(f"window size {A.shape[0]} exceeds max_dim={max_dim}")
    w = np.linalg.eigvals(A)
    w = w / np.abs(w)
    return w[np.argsort(np.angle(w) % (2 * np.pi), kind="stable")]


def nearest_eigen(pairs: list[EigenPair], z: complex) -> tuple[EigenPair, float]:
    """Pair minimizing chordal distance |z_k - z|; ties go to the lower index."""
    if not pairs:
        raise ValueError("empty eigenpair list")
    best, best_d = pairs[0], abs(pairs[0].value - z)
    for p in pairs[1:]:
        d = abs(p.value - z)
        if d < best_d:
            best, best_d = p, d
    return best, float(best_d)


def separation_gap(pairs: list[EigenPair], k: int) -> float:
    """min over j != k of |z_j - z_k|."""
    if len(pairs) < 2:
        raise ValueError("need at least two eigenpairs")
    zk = pairs[k].value
    return float(min(abs(p.value - zk) for i, p in enumerate(pairs) if i != k))


@dataclass(frozen=True)
class LocalizationProfile:
    sites: np.ndarray
    log_abs: np.ndarray
    center: int
    fitted_rate: float
    fit_window: tuple[int, int]
    passes: bool
    worst_site: int | None
    threshold_rate: float


def localization_profile(vector: np.ndarray, interval: tuple[int, int],
                         n0: int, gamma: float) -> LocalizationProfile:
    """Per-site log|u(s)| with a decay fit and the exp(-gamma|s|/20) test.

    The pass criterion checks |u(s)| < exp(-gamma |s| / 20) on all sites
    with |s| >= 3 n0 / 4; the decay rate is least-squares fitted on the same
    sites (slope of log|u| against |s|, sign-flipped).
    """
    a, b = interval
    u = np.asarray(vector, dtype=complex)
    if len(u) != b - a + 1:
        raise ValueError("vector length does not match interval")
    sites = np.arange(a, b + 1)
    mags = np.abs(u)
    log_abs = np.log(np.maximum(mags, 1e-300))
    center = int(sites[int(np.argmax(mags))])
    cut = 3.0 * n0 / 4.0
    mask = np.abs(sites) >= cut
    if not mask.any():
        raise ValueError("window has no sites with |s| >= 3 n0 / 4")
    passes = True
    worst = None
    worst_excess = -np.inf
    for s, mag in zip(sites[mask], mags[mask]):
        bound = np.exp(-gamma * abs(s) / 20.0)
        if mag >= bound:
            passes = False
            if mag - bound > worst_excess:
                worst_excess, worst = mag - bound, int(s)
    A = np.vstack([np.abs(sites[mask]), np.ones(mask.sum())]).T
    slope = float(np.linalg.lstsq(A, log_abs[mask], rcond=None)[0][0])
    return LocalizationProfile(sites=sites, log_abs=log_abs, center=center,
                               fitted_rate=-slope, fit_window=(int(np.ceil(cut)), b),
                               passes=passes, worst_site=worst,
                               threshold_rate=gamma / 20.0)


@dataclass(frozen=True)
class PerturbReport:
    """Outcome of the approximate-eigenvector check.

    part_a: some eigenvalue z0 lies within sqrt(2)*eps_tilde of z and its
    eigenvector overlaps phi by at least (2N)^{-1/2}.
    part_b: when the disk D(z, eps_hat) isolates exactly one eigenvalue,
    the phase-aligned distance ||phi - psi|| is below sqrt(2)/eps_hat*eps_tilde.
    """

    input_residual: float
    z0: complex
    dist_z0: float
    overlap: float
    part_a_dist_ok: bool
    part_a_overlap_ok: bool
    isolated_count: int
    part_b_applicable: bool
    aligned_distance: float | None
    part_b_ok: bool | None


def perturb_eigen_check(A: np.ndarray, phi: np.ndarray, z: complex,
                        eps_tilde: float, eps_hat: float | None = None) -> PerturbReport:
    """Check the two-part eigenvector stability statement on a unitary A."""
    A = np.asarray(A, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    N = A.shape[0]
    if abs(np.linalg.norm(phi) - 1.0) > 1e-10:
        raise ValueError("phi must be normalized")
    res = float(np.linalg.norm(A @ phi - z * phi))
    if res >= eps_tilde:
        raise ValueError(f"hypothesis fails: ||(A - z) phi|| = {res:.3e} >= {eps_tilde:.3e}")
    pairs = eigensolve(A)

    overlaps = np.array([abs(np.vdot(p.vector, phi)) for p in pairs])
    dists = np.array([abs(p.value - z) for p in pairs])
    floor = (2.0 * N) ** -0.5
    candidates = [i for i in range(len(pairs))
                  if dists[i] < np.sqrt(2.0) * eps_tilde and overlaps[i] >= floor]
    if candidates:
        best = max(candidates, key=lambda i: overlaps[i])
    else:
        best = int(np.argmax(overlaps))
    z0 = pairs[best].value
    report = dict(input_residual=res, z0=z0, dist_z0=float(dists[best]),
                  overlap=float(overlaps[best]),
                  part_a_dist_ok=bool(dists[best] < np.sqrt(2.0) * eps_tilde),
                  part_a_overlap_ok=bool(overlaps[best] >= floor))

    if eps_hat is None:
        return PerturbReport(**report, isolated_count=0, part_b_applicable=False,
                             aligned_distance=None, part_b_ok=None)
    if eps_hat <= eps_tilde:
        raise ValueError("need eps_hat > eps_tilde")
    inside = [i for i in range(len(pairs)) if dists[i] < eps_hat]
    if len(inside) != 1:
        return PerturbReport(**report, isolated_count=len(inside),
                             part_b_applicable=False, aligned_distance=None,
                             part_b_ok=None)
    psi = pairs[inside[0]].vector
    inner = np.vdot(psi, phi)
    aligned = psi * (inner / abs(inner)) if inner != 0 else psi
    dist = float(np.linalg.norm(phi - aligned))
    return PerturbReport(**report, isolated_count=1, part_b_applicable=True,
                         aligned_distance=dist,
                         part_b_ok=bool(dist < np.sqrt(2.0) * eps_tilde / eps_hat))
