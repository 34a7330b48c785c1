"""Szego cocycles, renormalized transfer products, and Lyapunov estimates.

Products of the determinant-1 one-step map are accumulated with the largest
entry stripped into a running log every step, so norms of products with
tens of thousands of factors stay representable.  All Monte-Carlo phase
averages use counter-based seeding and are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus import Frequency, Phase, SamplingFunction, reduce_phase
from .util import TWO_PI, counter_rng


@dataclass(frozen=True)
class SpectralPoint:
    """Point z = e^{i theta} on the unit circle with the fixed root branch.

    sqrt(z) = e^{i theta/2} with theta in [0, 2 pi); the branch choice only
    rotates transfer matrices by a global phase, but fixing it makes every
    matrix in the test-suite deterministic.
    """

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    @property
    def z(self) -> complex:
        return complex(np.exp(1j * self.theta))

    @property
    def sqrt_z(self) -> complex:
        return complex(np.exp(0.5j * self.theta))

    @classmethod
    def from_z(cls, z: complex) -> "SpectralPoint":
        return cls(theta=float(np.angle(z)))


def _omega_array(omega) -> np.ndarray:
    return omega.array() if isinstance(omega, Frequency) else np.asarray(omega, float)


def cocycle_step(f: SamplingFunction, z: SpectralPoint, x: Phase) -> np.ndarray:
    """One-step map (1/rho) [[sqrt z, -conj(a)/sqrt z], [-a sqrt z, 1/sqrt z]]."""
    sz = z.sqrt_z
    if x.imag is None or not any(x.imag):
        a = f.alpha(x)
        ab = np.conj(a)
        r = np.sqrt(1.0 - (a.real * a.real + a.imag * a.imag))
    else:
        a = f.alpha(x)
        ab = f.alpha_bar(x)
        r = f.rho_strip(x)
    return np.array([[sz, -ab / sz], [-a * sz, 1.0 / sz]], dtype=complex) / r


@dataclass
class CocycleProduct:
    """Renormalized n-step transfer matrix.

    ``matrix`` has unit max-entry norm; the full product is
    exp(log_norm) * matrix.  ``log_det_abs`` accumulates log|det| factor by
    factor (each factor has det 1 up to rounding), giving an overflow-free
    determinant diagnostic.
    """

    n: int
    matrix: np.ndarray
    log_norm: float
    log_det_abs: float
    base: Phase
    omega: np.ndarray
    point: SpectralPoint

    @property
    def log_norm2(self) -> float:
        """log of the spectral norm of the full product."""
        m = self.matrix
        fro2 = abs(m[0, 0]) ** 2 + abs(m[0, 1]) ** 2 + abs(m[1, 0]) ** 2 + abs(m[1, 1]) ** 2
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        disc = max(fro2 * fro2 - 4 * abs(det) ** 2, 0.0)
        return self.log_norm + 0.5 * np.log(0.5 * (fro2 + np.sqrt(disc)))

    @property
    def u_n(self) -> float:
        """(1/n) log ||M_n||."""
        return self.log_norm2 / self.n


def transfer_product(f: SamplingFunction, omega, z: SpectralPoint, x: Phase,
                     n: int) -> CocycleProduct:
    """Ordered product M(x+(n-1)w) ... M(x), renormalized every step."""
    if n < 1:
        raise ValueError("n must be >= 1")
    om = _omega_array(omega)
    sz = z.sqrt_z
    iz = 1.0 / sz
    y = None if x.imag is None or not any(x.imag) else x.imag_array()

    if y is None:
        alphas = f.alpha_orbit(x, om, n)
        alpha_bars = np.conj(alphas)
        rhos = np.sqrt(1.0 - np.abs(alphas) ** 2)
    else:
        alphas = f.alpha_orbit(Phase(x.coords), om, n, y=y)
        alpha_bars = np.conj(f.alpha_orbit(Phase(x.coords), om, n, y=-y))
        rhos = np.sqrt(1.0 - alphas * alpha_bars)

    m00, m01, m10, m11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    log_norm = 0.0
    log_det = 0.0
    for j in range(n):
        a, ab, r = alphas[j], alpha_bars[j], rhos[j]
        s00, s01, s10, s11 = sz / r, -ab * iz / r, -a * sz / r, iz / r
        log_det += np.log(abs(s00 * s11 - s01 * s10))
        n00 = s00 * m00 + s01 * m10
        n01 = s00 * m01 + s01 * m11
        n10 = s10 * m00 + s11 * m10
        n11 = s10 * m01 + s11 * m11
        sc = max(abs(n00), abs(n01), abs(n10), abs(n11))
        m00, m01, m10, m11 = n00 / sc, n01 / sc, n10 / sc, n11 / sc
        log_norm += np.log(sc)
    return CocycleProduct(n=n, matrix=np.array([[m00, m01], [m10, m11]]),
                          log_norm=log_norm, log_det_abs=log_det,
                          base=x, omega=om, point=z)


def transfer_log_norms(f: SamplingFunction, omega, z: SpectralPoint, x: Phase,
                       checkpoints) -> dict[int, float]:
    """log ||M_n|| at each n in checkpoints, from a single orbit sweep."""
    marks = sorted(set(int(c) for c in checkpoints))
    if marks[0] < 1:
        raise ValueError("checkpoints must be >= 1")
    om = _omega_array(omega)
    sz = z.sqrt_z
    iz = 1.0 / sz
    top = marks[-1]
    alphas = f.alpha_orbit(x, om, top)
    rhos = np.sqrt(1.0 - np.abs(alphas) ** 2)
    out: dict[int, float] = {}
    m00, m01, m10, m11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    log_norm = 0.0
    want = set(marks)
    for j in range(top):
        a, r = alphas[j], rhos[j]
        ab = a.conjugate()
        s00, s01, s10, s11 = sz / r, -ab * iz / r, -a * sz / r, iz / r
        n00 = s00 * m00 + s01 * m10
        n01 = s00 * m01 + s01 * m11
        n10 = s10 * m00 + s11 * m10
        n11 = s10 * m01 + s11 * m11
        sc = max(abs(n00), abs(n01), abs(n10), abs(n11))
        m00, m01, m10, m11 = n00 / sc, n01 / sc, n10 / sc, n11 / sc
        log_norm += np.log(sc)
        if (j + 1) in want:
            fro2 = abs(m00) ** 2 + abs(m01) ** 2 + abs(m10) ** 2 + abs(m11) ** 2
            det = m00 * m11 - m01 * m10
            disc = max(fro2 * fro2 - 4 * abs(det) ** 2, 0.0)
            out[j + 1] = log_norm + 0.5 * np.log(0.5 * (fro2 + np.sqrt(disc)))
    return out


@dataclass(frozen=True)
class LyapunovEstimate:
    n: int
    value: float
    sample_count: int
    std_error: float
    method: str


def lyapunov_finite(f: SamplingFunction, omega, z: SpectralPoint, n: int,
                    samples: int, seed: int) -> LyapunovEstimate:
    """Monte-Carlo estimate of L_n = E_x (1/n) log ||M_n(x)||."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = f.dim
    vals = np.empty(samples)
    for s in range(samples):
        x = Phase(tuple(counter_rng(seed, s).random(d)))
        vals[s] = transfer_product(f, omega, z, x, n).u_n
    err = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return LyapunovEstimate(n=n, value=float(vals.mean()), sample_count=samples,
                            std_error=err, method="direct")


# --------------------------------------------------------------------------
# avalanche principle


@dataclass(frozen=True)
class AvalancheReport:
    """Hypotheses and conclusion of the unimodular product expansion.

    expression = |log||A_m...A_1|| + sum_{j=2}^{m-1} log||A_j||
                 - sum_{j=1}^{m-1} log||A_{j+1} A_j|||.
    """

    m: int
    mu: float
    max_defect: float
    worst_pair: int
    hyp_norms_ok: bool
    hyp_pairs_ok: bool
    expression: float
    bound: float

    @property
    def hypotheses_ok(self) -> bool:
        return self.hyp_norms_ok and self.hyp_pairs_ok


def _norm2(A: np.ndarray) -> float:
    fro2 = float(np.sum(np.abs(A) ** 2))
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = max(fro2 * fro2 - 4 * abs(det) ** 2, 0.0)
    return float(np.sqrt(0.5 * (fro2 + np.sqrt(disc))))


def avalanche_report(mats, c_a: float = 10.0) -> AvalancheReport:
    """Evaluate the product-expansion identity for explicit 2x2 factors."""
    mats = [np.asarray(A, dtype=complex) for A in mats]
    m = len(mats)
    if m < 2:
        raise ValueError("need at least two factors")
    norms = np.array([_norm2(A) for A in mats])
    mu = float(norms.min())
    logs = np.log(norms)
    pair_logs = np.array([np.log(_norm2(mats[j + 1] @ mats[j])) for j in range(m - 1)])
    defects = logs[1:] + logs[:-1] - pair_logs
    worst = int(np.argmax(defects))
    P = mats[0]
    log_scale = 0.0
    for A in mats[1:]:
        P = A @ P
        s = float(np.max(np.abs(P)))
        P /= s
        log_scale += np.log(s)
    expr = abs(log_scale + np.log(_norm2(P)) + logs[1:m - 1].sum() - pair_logs.sum())
    return AvalancheReport(
        m=m, mu=mu, max_defect=float(defects.max()), worst_pair=worst,
        hyp_norms_ok=bool(mu >= m),
        hyp_pairs_ok=bool(defects.max() < 0.5 * np.log(mu)) if mu > 1 else False,
        expression=float(expr), bound=float(c_a * m / mu))


class AvalancheHypothesisError(RuntimeError):
    def __init__(self, report: AvalancheReport, level_n: int):
        self.report = report
        self.level_n = level_n
        which = []
        if not report.hyp_norms_ok:
            which.append(f"min norm {report.mu:.4g} < m={report.m}")
        if not report.hyp_pairs_ok:
            which.append(f"pair defect {report.max_defect:.4g} at pair "
                         f"{report.worst_pair} >= log(mu)/2")
        super().__init__(f"AP hypotheses violated at factor length {level_n}: "
                         + "; ".join(which))


def _chain_report(ms: list[np.ndarray], logs: list[float]) -> AvalancheReport:
    """avalanche_report for factors given as (renormalized matrix, log scale)."""
    m = len(ms)
    log_norms = np.array([lg + np.log(_norm2(A)) for A, lg in zip(ms, logs)])
    log_mu = float(log_norms.min())
    pair_logs = np.empty(m - 1)
    for j in range(m - 1):
        pair_logs[j] = logs[j + 1] + logs[j] + np.log(_norm2(ms[j + 1] @ ms[j]))
    defects = log_norms[1:] + log_norms[:-1] - pair_logs
    worst = int(np.argmax(defects))
    P = ms[0]
    log_scale = logs[0]
    for A, lg in zip(ms[1:], logs[1:]):
        P = A @ P
        s = float(np.max(np.abs(P)))
        P /= s
        log_scale += lg + np.log(s)
    expr = abs(log_scale + np.log(_norm2(P))
               + log_norms[1:m - 1].sum() - pair_logs.sum())
    mu = float(np.exp(min(log_mu, 700.0)))
    return AvalancheReport(
        m=m, mu=mu, max_defect=float(defects.max()), worst_pair=worst,
        hyp_norms_ok=bool(log_mu >= np.log(m)),
        hyp_pairs_ok=bool(defects.max() < 0.5 * log_mu) if log_mu > 0 else False,
        expression=float(expr), bound=float(10.0 * m * np.exp(-min(log_mu, 700.0))))


def lyapunov_avalanche(f: SamplingFunction, omega, z: SpectralPoint, n0: int,
                       levels: int, samples: int, seed: int,
                       chain: int = 8) -> LyapunovEstimate:
    """Accelerated estimate from short-scale data via the product expansion.

    At level l the per-sample chain A_j = M_n(x + j n w), n = n0 2^l, is
    screened against the expansion hypotheses (first violation aborts with
    the offending pair), then log||M_{chain*n}|| is reconstructed from pair
    products only:  sum log||A_{j+1}A_j|| - sum_{j=2}^{m-1} log||A_j||.
    Averaged over phases this realizes the 2 L_{2n} - L_n combination.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if chain < 2:
        raise ValueError("chain must be >= 2")
    d = f.dim
    om = _omega_array(omega)
    est = None
    for lev in range(levels):
        n = n0 * 2 ** lev
        vals = np.empty(samples)
        for s in range(samples):
            x = Phase(tuple(counter_rng(seed, lev, s).random(d)))
            ms, logs = [], []
            for j in range(chain):
                xj = reduce_phase(x.array() + j * n * om)
                pr = transfer_product(f, om, z, xj, n)
                ms.append(pr.matrix)
                logs.append(pr.log_norm)
            rep = _chain_report(ms, logs)
            if not rep.hypotheses_ok:
                raise AvalancheHypothesisError(rep, n)
            log_norms = [lg + np.log(_norm2(A)) for A, lg in zip(ms, logs)]
            pair_logs = [logs[j + 1] + logs[j] + np.log(_norm2(ms[j + 1] @ ms[j]))
                         for j in range(chain - 1)]
            vals[s] = (sum(pair_logs) - sum(log_norms[1:chain - 1])) / (chain * n)
        err = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
        est = LyapunovEstimate(n=chain * n, value=float(vals.mean()),
                               sample_count=samples, std_error=err,
                               method="avalanche")
    return est


# --------------------------------------------------------------------------
# regularity checks


@dataclass(frozen=True)
class MonotonicityReport:
    estimates: dict
    violations: list
    fitted_c: float
    sigma: float

    @property
    def ok(self) -> bool:
        return not self.violations


def check_ln_monotonicity(f: SamplingFunction, omega, z: SpectralPoint,
                          scales, samples: int, seed: int,
                          sigma: float = 0.5) -> MonotonicityReport:
    """Check L_n <= L_m + 3 SE for every divisor pair m | n in scales.

    All scales are computed from the same sampled orbits, so the comparison
    is exact in the common-noise part.  Also fits the constant in the
    finite-scale defect C (log n)^{1/sigma} / n against the largest scale.
    """
    scales = sorted(set(int(v) for v in scales))
    d = f.dim
    table = np.empty((samples, len(scales)))
    for s in range(samples):
        x = Phase(tuple(counter_rng(seed, s).random(d)))
        logs = transfer_log_norms(f, omega, z, x, scales)
        table[s] = [logs[n] / n for n in scales]
    means = table.mean(axis=0)
    errs = table.std(axis=0, ddof=1) / np.sqrt(samples) if samples > 1 \
        else np.zeros(len(scales))
    estimates = {n: LyapunovEstimate(n=n, value=float(means[i]),
                                     sample_count=samples,
                                     std_error=float(errs[i]), method="direct")
                 for i, n in enumerate(scales)}
    violations = []
    for i, m in enumerate(scales):
        for j, n in enumerate(scales):
            if m < n and n % m == 0:
                slack = 3.0 * (errs[i] + errs[j]) + 1e-9
                if means[j] > means[i] + slack:
                    violations.append((m, n, float(means[j] - means[i])))
    tail = means[-1]
    cs = [(means[i] - tail) * n / np.log(n) ** (1.0 / sigma)
          for i, n in enumerate(scales[:-1]) if n >= 2]
    fitted = float(max(cs)) if cs else 0.0
    return MonotonicityReport(estimates=estimates, violations=violations,
                              fitted_c=fitted, sigma=sigma)


@dataclass(frozen=True)
class StripContinuityReport:
    ratios: dict
    max_ratio: float
    base_value: float


def strip_continuity_check(f: SamplingFunction, omega, z: SpectralPoint, n: int,
                           y_list, samples: int = 64,
                           seed: int = 0) -> StripContinuityReport:
    """Empirical Lipschitz ratio |L_n(y) - L_n(0)| / sum |y_i| on the strip."""
    d = f.dim
    base = lyapunov_finite(f, omega, z, n, samples, seed).value
    ratios = {}
    for y in y_list:
        y = tuple(float(v) for v in np.atleast_1d(y))
        if max(abs(v) for v in y) >= f.strip_width / 2:
            raise ValueError(f"y={y} leaves the half-strip |y| < h/2")
        tot = sum(abs(v) for v in y)
        vals = np.empty(samples)
        for s in range(samples):
            x = Phase(tuple(counter_rng(seed, s).random(d)), imag=y)
            vals[s] = transfer_product(f, omega, z, x, n).u_n
        diff = abs(float(vals.mean()) - base)
        ratios[y] = diff / tot if tot > 0 else 0.0
    mx = max(ratios.values()) if ratios else 0.0
    return StripContinuityReport(ratios=ratios, max_ratio=float(mx), base_value=base)


@dataclass(frozen=True)
class UniformUpperReport:
    n: int
    sup_log_norm: float
    mean_log_norm: float
    excess: float
    grid_points: int


def uniform_upper_check(f: SamplingFunction, omega, z: SpectralPoint, n: int,
                        grid: int = 32) -> UniformUpperReport:
    """sup_x log||M_n(x)|| - n L_n with both terms from one phase grid."""
    if grid < 32:
        raise ValueError("grid resolution must be >= 32 per dimension")
    d = f.dim
    axes = [np.arange(grid) / grid] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    logs = np.empty(len(mesh))
    for i, xv in enumerate(mesh):
        logs[i] = transfer_product(f, omega, z, Phase(tuple(xv)), n).log_norm2
    sup = float(logs.max())
    mean = float(logs.mean())
    return UniformUpperReport(n=n, sup_log_norm=sup, mean_log_norm=mean,
                              excess=sup - mean, grid_points=len(mesh))
