"""Interval-coverage scan: which arc points are approximate eigenvalues.

For each grid point z on an arc the scan hunts for a phase x whose window
spectrum comes within tolerance of z and whose matching eigenvector decays
at the window edges.  Finding one marks z covered; the summary reports the
maximal covered sub-arcs.

The scan precomputes full spectra only for the seeded phase samples; all
local refinement work runs through shift-invert iteration on the
tridiagonal pencil z L* - M, which costs O(window) per probe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .cmv import FiniteCMV, VerblunskySequence, apply_cmv, build_finite_cmv
from .torus import Frequency, Phase, SamplingFunction
from .util import TWO_PI, counter_rng, phase_of, wrap_angle


@dataclass(frozen=True)
class CoveragePoint:
    theta: float
    covered: bool
    best_dist: float
    phase: tuple
    edge_value: float


@dataclass(frozen=True)
class CoverageScan:
    points: list
    covered_arcs: list          # (theta_start, theta_end) counterclockwise
    window: int
    tol: float

    @property
    def covered_fraction(self) -> float:
        return sum(1 for p in self.points if p.covered) / len(self.points)


def nearest_eigen_banded(m: FiniteCMV, z: complex, max_iters: int = 30,
                         res_tol: float = 1e-10):
    """Eigenpair of the window nearest z by tridiagonal shift-invert.

    Returns (eigenvalue, vector, residual); the eigenvalue comes from the
    Rayleigh quotient of the inverse-iteration vector, projected to the
    circle.  The window operator is normal, so |z - lam| + residual is a
    certified upper bound on dist(z, spectrum); callers must not trust the
    raw |z - lam| when the residual is large (unconverged iteration deep in
    a gap).  An exactly singular solve means z is an eigenvalue.
    """
    n = m.size
    ab = m.zlstar_minus_m_banded(z)
    rng = np.random.default_rng(1234)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam, res = z, np.inf
    for it in range(max_iters):
        try:
            v = solve_banded((1, 1), ab, v)
        except np.linalg.LinAlgError:
            return z, None, 0.0
        nrm = np.linalg.norm(v)
        if not np.isfinite(nrm) or nrm == 0:
            return z, None, 0.0
        v /= nrm
        if it >= 2:
            ev = apply_cmv(m, v)
            lam = complex(np.vdot(v, ev))
            lam /= abs(lam)
            res = float(np.linalg.norm(ev - lam * v))
            if res < res_tol:
                break
    if not np.isfinite(res):
        ev = apply_cmv(m, v)
        lam = complex(np.vdot(v, ev))
        lam /= abs(lam)
        res = float(np.linalg.norm(ev - lam * v))
    return lam, v, res


def interval_coverage_scan(f: SamplingFunction, omega, arc: tuple[float, float],
                           grid: int, window: int, tol: float,
                           phase_samples: int = 8, seed: int = 0,
                           beta: complex = 1.0 + 0j, eta: complex = 1.0 + 0j,
                           refine_steps: int = 16,
                           refine_gate: float | None = None) -> CoverageScan:
    """Scan ``grid`` points of the arc [theta1, theta2] for coverage.

    Each grid point starts from the best of ``phase_samples`` precomputed
    seeded phases; if that misses tolerance but is within ``refine_gate``
    (default 16*tol), the last phase coordinate is refined by bisecting the
    wrapped eigenphase difference of the locally nearest eigenvalue.
    Covered additionally requires the matched eigenvector's outer edge
    entries to stay below sqrt(tol).
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    th1, th2 = arc
    span = (th2 - th1) % TWO_PI
    if span == 0:
        span = TWO_PI
    om = omega.array() if isinstance(omega, Frequency) else np.asarray(omega, float)
    d = f.dim
    N = int(window)
    a, b = -N, N
    gate = float(refine_gate) if refine_gate is not None else 16.0 * tol

    xs, spectra, matrices = [], [], []
    for s in range(phase_samples):
        x = Phase(tuple(counter_rng(seed, s).random(d)))
        seq = VerblunskySequence(f, om, x)
        m = build_finite_cmv(seq, a, b, beta=beta, eta=eta)
        w = np.linalg.eigvals(m.dense())
        xs.append(x)
        spectra.append(w / np.abs(w))
        matrices.append(m)

    def build_at(coords: np.ndarray) -> FiniteCMV:
        seq = VerblunskySequence(f, om, Phase(tuple(coords % 1.0)))
        return build_finite_cmv(seq, a, b, beta=beta, eta=eta)

    points = []
    sqrt_tol = float(np.sqrt(tol))
    for g in range(grid):
        theta = (th1 + span * g / grid) % TWO_PI
        z = np.exp(1j * theta)
        best_s, best_d = 0, np.inf
        for s in range(phase_samples):
            dist = float(np.min(np.abs(spectra[s] - z)))
            if dist < best_d:
                best_s, best_d = s, dist
        x_arr = np.array(xs[best_s].coords)
        dist_best = best_d
        matched = matrices[best_s]
        if tol < dist_best <= gate and refine_steps > 0:
            x_arr, dist_best, matched = _refine(build_at, z, x_arr, dist_best,
                                                matched, refine_steps)
        covered = dist_best <= tol
        edge = np.inf
        if covered:
            _, vec, _ = nearest_eigen_banded(matched, z)
            if vec is None:
                edge = 0.0
            else:
                u = np.abs(vec)
                edge = float(max(u[:4].max(), u[-4:].max()))
            covered = edge <= sqrt_tol
        points.append(CoveragePoint(theta=float(theta), covered=bool(covered),
                                    best_dist=float(dist_best),
                                    phase=tuple(float(v) for v in x_arr % 1.0),
                                    edge_value=float(edge)))

    arcs = _covered_arcs(points, span)
    return CoverageScan(points=points, covered_arcs=arcs, window=N, tol=tol)


def _refine(build_at, z: complex, x0: np.ndarray, d0: float, m0: FiniteCMV,
            steps: int):
    """Bisection on the wrapped eigenphase difference along the last
    coordinate, using shift-invert probes."""
    theta = phase_of(z)

    def probe(t: float):
        coords = x0.copy()
        coords[-1] = t % 1.0
        m = build_at(coords)
        lam, _, res = nearest_eigen_banded(m, z)
        # certified distance bound for a normal matrix
        return wrap_angle(phase_of(lam) - theta), float(abs(lam - z) + res), coords, m

    best_d, best_x, best_m = d0, x0, m0
    ts = x0[-1] + np.linspace(-0.5, 0.5, 17)
    vals = []
    for t in ts:
        g, dist, coords, m = probe(t)
        vals.append(g)
        if dist < best_d:
            best_d, best_x, best_m = dist, coords, m
    for i in range(len(ts) - 1):
        if np.sign(vals[i]) != np.sign(vals[i + 1]):
            lo, hi, flo = ts[i], ts[i + 1], vals[i]
            for _ in range(steps):
                mid = 0.5 * (lo + hi)
                g, dist, coords, m = probe(mid)
                if dist < best_d:
                    best_d, best_x, best_m = dist, coords, m
                if np.sign(g) == np.sign(flo):
                    lo, flo = mid, g
                else:
                    hi = mid
            break
    return best_x, best_d, best_m


def _covered_arcs(points, span):
    """Maximal runs of covered grid points, as (start, end) angles."""
    n = len(points)
    covered = [p.covered for p in points]
    if all(covered):
        return [(points[0].theta, (points[0].theta + span) % TWO_PI)]
    if not any(covered):
        return []
    arcs = []
    full_circle = abs(span - TWO_PI) < 1e-12
    start = None
    for i in range(n):
        if covered[i] and start is None:
            start = i
        if not covered[i] and start is not None:
            arcs.append((points[start].theta, points[i - 1].theta))
            start = None
    if start is not None:
        arcs.append((points[start].theta, points[n - 1].theta))
    # merge a run that wraps around the grid seam on full circles
    if full_circle and len(arcs) >= 2 and covered[0] and covered[-1]:
        first, last = arcs[0], arcs.pop()
        arcs[0] = (last[0], first[1])
    return arcs
