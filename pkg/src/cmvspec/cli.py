"""Command-line driver: config ingestion, experiments, persistent results.

Every command reads a JSON config (or a previously written manifest), runs
one experiment, and writes CSV/JSON outputs plus a manifest capturing the
resolved config, seed, and a content hash.  Outputs are byte-stable: BLAS
threading is pinned to one thread before numpy loads, all randomness is
counter-seeded, and floats are serialized in shortest round-trip form.

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 hypothesis
failure (multiscale/AP preconditions).
"""

import os

for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .cmv import VerblunskySequence, build_finite_cmv
from .cocycle import (AvalancheHypothesisError, SpectralPoint,
                      lyapunov_finite)
from .coverage import interval_coverage_scan
from .determinants import relation_residual
from .green import green_value, poisson_residual
from .ldt import ldt_determinant_scan, ldt_measure_scan
from .multiscale import (ScaleSchedule, find_base_state, inductive_advance,
                         suggest_center, verify_conditions_ABCD)
from .spectral import eigensolve, localization_profile, nearest_eigen
from .torus import Frequency, Phase, SamplingFunction, reduce_phase
from . import presets
from .util import counter_rng, format_float

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_HYPOTHESIS = 4


class ConfigError(Exception):
    pass


class HypothesisFailure(Exception):
    pass


# --------------------------------------------------------------------------
# config handling


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_config(path: str, command: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "config" in data and "command" in data:    # manifest re-run
        if data["command"] != command:
            raise ConfigError(
                f"manifest was written by '{data['command']}', not '{command}'")
        return data["config"]
    return data


def resolve_sampling(cfg: dict) -> SamplingFunction:
    spec = cfg.get("sampling")
    if spec is None:
        raise ConfigError("config lacks 'sampling'")
    if isinstance(spec, dict) and "preset" in spec:
        name = spec["preset"]
        factory = {
            "zero": presets.zero_function,
            "constant": presets.constant_function,
            "single_mode": presets.single_mode,
            "two_mode": presets.two_mode,
            "strong_coupling": presets.strong_coupling,
            "localization": presets.localization_example,
        }.get(name)
        if factory is None:
            raise ConfigError(f"unknown sampling preset '{name}'")
        kwargs = {k: v for k, v in spec.items() if k != "preset"}
        try:
            return factory(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad arguments for preset '{name}': {exc}") from exc
    try:
        return SamplingFunction.from_json(json.dumps(spec))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad sampling spec: {exc}") from exc


def resolve_frequency(cfg: dict, dim: int) -> Frequency:
    spec = cfg.get("frequency")
    if spec is None:
        raise ConfigError("config lacks 'frequency'")
    if isinstance(spec, dict) and "preset" in spec:
        name = spec["preset"]
        if name == "golden":
            return presets.golden_frequency()
        if name == "sqrt":
            return presets.sqrt_frequency()
        raise ConfigError(f"unknown frequency preset '{name}'")
    try:
        freq = Frequency.checked(spec["coords"], p=spec["p"], q=spec["q"],
                                 k_max=spec.get("k_max", 200))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad frequency spec: {exc}") from exc
    if freq.dim != dim:
        raise ConfigError(f"frequency dim {freq.dim} != sampling dim {dim}")
    return freq


def resolve_boundary(cfg: dict):
    spec = cfg.get("boundary", {})
    def unit(v, name):
        c = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ConfigError(f"|{name}| must be 1")
        return c
    beta = unit(spec.get("beta", [1.0, 0.0]), "beta")
    eta = unit(spec.get("eta", [1.0, 0.0]), "eta")
    return beta, eta


def write_manifest(outdir: Path, command: str, cfg: dict, seed: int) -> None:
    body = {"command": command, "config": cfg, "seed": seed}
    body["content_hash"] = hashlib.sha256(_canonical(body).encode()).hexdigest()
    (outdir / "manifest.json").write_text(_canonical(body) + "\n", encoding="utf-8")


def write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# commands


def cmd_lyapunov(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("lyapunov")
    if not isinstance(block, dict):
        raise ConfigError("config lacks a 'lyapunov' block")
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    thetas = block.get("thetas")
    if thetas is None:
        grid = block.get("theta_grid", 16)
        thetas = [2 * np.pi * g / grid for g in range(grid)]
    scales = block.get("scales", [block.get("n", 100)])
    samples = int(block.get("samples", 100))
    rows = []
    for theta in thetas:
        z = SpectralPoint(float(theta))
        for n in scales:
            est = lyapunov_finite(f, freq, z, int(n), samples, seed)
            rows.append((float(z.theta), int(n), float(est.value),
                         float(est.std_error), est.method))
    write_csv(outdir / "lyapunov.csv", "theta,n,L_n,std_error,method", rows)
    return 0


def cmd_spectrum_scan(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("spectrum")
    if not isinstance(block, dict):
        raise ConfigError("config lacks a 'spectrum' block")
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    beta, eta = resolve_boundary(cfg)
    arc = block.get("arc", [0.0, 2 * np.pi])
    if len(arc) != 2:
        raise ConfigError("'arc' must be [theta1, theta2]")
    full_circle = abs(float(arc[1]) - float(arc[0])) >= 2 * np.pi - 1e-12
    if (float(arc[1]) - float(arc[0])) % (2 * np.pi) == 0.0 and not full_circle:
        raise ConfigError("'arc' endpoints coincide")
    scan = interval_coverage_scan(
        f, freq, (float(arc[0]), float(arc[1])), grid=int(block.get("grid", 360)),
        window=int(block.get("window", 100)), tol=float(block.get("tol", 0.02)),
        phase_samples=int(block.get("phase_samples", 8)), seed=seed,
        beta=beta, eta=eta)
    d = f.dim
    header = "theta,covered,best_dist," + ",".join(f"phase_x{i}" for i in range(d)) \
        + ",edge_value"
    rows = [(p.theta, int(p.covered), p.best_dist, *[float(v) for v in p.phase],
             p.edge_value) for p in scan.points]
    write_csv(outdir / "coverage.csv", header, rows)
    summary = {
        "covered_fraction": scan.covered_fraction,
        "covered_arcs": [[float(a), float(b)] for a, b in scan.covered_arcs],
        "window": scan.window,
        "tol": scan.tol,
    }
    (outdir / "arc_summary.json").write_text(_canonical(summary) + "\n",
                                             encoding="utf-8")
    return 0


def cmd_ldt(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("ldt")
    if not isinstance(block, dict):
        raise ConfigError("config lacks an 'ldt' block")
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    beta, eta = resolve_boundary(cfg)
    z = SpectralPoint(float(block.get("theta", 0.0)))
    n_list = [int(v) for v in block.get("n_list", [50, 100, 200])]
    tau = float(block.get("tau", 0.3))
    samples = int(block.get("samples", 500))
    scan = ldt_measure_scan(f, freq, z, n_list, tau, samples, seed)
    rows = [(e.n, float(e.estimate), float(e.interval.lo), float(e.interval.hi),
             float(scan.l_values[e.n])) for e in scan.estimates]
    write_csv(outdir / "ldt_matrix.csv", "n,estimate,wilson_lo,wilson_hi,L_n", rows)
    if block.get("determinant", False):
        dscan = ldt_determinant_scan(f, freq, z, n_list, tau, samples, seed,
                                     beta=beta, eta=eta)
        rows = [(e.n, float(e.estimate), float(e.interval.lo),
                 float(e.interval.hi), float(dscan.l_values[e.n]))
                for e in dscan.estimates]
        write_csv(outdir / "ldt_determinant.csv",
                  "n,estimate,wilson_lo,wilson_hi,L_n", rows)
    return 0


def cmd_localize(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("localize")
    if not isinstance(block, dict):
        raise ConfigError("config lacks a 'localize' block")
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    beta, eta = resolve_boundary(cfg)
    near_theta = float(block.get("theta", 2.5))
    n0 = int(block.get("n0", 16))
    schedule = ScaleSchedule(n0=n0, s_max=0,
                             overrides=block.get("overrides", {}))
    try:
        z, x_hint = suggest_center(f, freq, near_theta, n0, schedule,
                                   scan_grid=int(block.get("scan_grid", 16)),
                                   beta=beta, eta=eta)
    except RuntimeError as exc:
        raise HypothesisFailure(str(exc)) from exc
    gamma = block.get("gamma")
    if gamma is None:
        est = lyapunov_finite(f, freq, z, max(100, 2 * n0),
                              int(block.get("gamma_samples", 100)), seed)
        gamma = est.value - 3 * est.std_error
    gamma = float(gamma)
    try:
        state = find_base_state(f, freq, z, n0, schedule, gamma,
                                beta=beta, eta=eta, x_hint=x_hint)
    except RuntimeError as exc:
        raise HypothesisFailure(str(exc)) from exc
    x = state.base_x
    seq = VerblunskySequence(f, freq, x)
    lo, hi = state.window_interval()
    pairs = eigensolve(build_finite_cmv(seq, lo, hi, beta=beta, eta=eta))
    pair, dist = nearest_eigen(pairs, z.z)
    profile = localization_profile(pair.vector, (lo, hi), n0, gamma)
    rows = [(int(s), float(v)) for s, v in zip(profile.sites, profile.log_abs)]
    write_csv(outdir / "profile.csv", "s,log_abs_u", rows)
    write_csv(outdir / "eigen.csv", "k,theta_k,residual",
              [(p.index, float(p.theta), float(p.residual)) for p in pairs])
    verdict = {
        "theta_center": z.theta,
        "gamma": gamma,
        "eigenvalue_distance": dist,
        "center": profile.center,
        "fitted_rate": profile.fitted_rate,
        "passes": profile.passes,
        "base_phase": [float(v) for v in x.coords],
    }
    (outdir / "localize.json").write_text(_canonical(verdict) + "\n",
                                          encoding="utf-8")
    return 0


def cmd_multiscale(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("multiscale")
    if not isinstance(block, dict):
        raise ConfigError("config lacks a 'multiscale' block")
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    beta, eta = resolve_boundary(cfg)
    near_theta = float(block.get("theta", 2.5))
    n0 = int(block.get("n0", 16))
    depth = int(block.get("depth", 0))
    sched_cfg = block.get("schedule", {})
    try:
        schedule = ScaleSchedule(
            n0=n0, s_max=max(depth, 1),
            nu_prime=float(sched_cfg.get("nu_prime", 0.1)),
            c0=float(sched_cfg.get("c0", 3.5)),
            c1=float(sched_cfg.get("c1", 2.0)),
            c2=float(sched_cfg.get("c2", 3.2)),
            nu=float(sched_cfg.get("nu", 0.1)),
            tau=float(sched_cfg.get("tau", 0.3)),
            growth=sched_cfg.get("growth"),
            overrides=sched_cfg.get("overrides", {}))
    except ValueError as exc:
        raise ConfigError(f"bad schedule: {exc}") from exc
    probe = schedule.scale(1) + n0 if depth >= 1 else None
    try:
        z, x_hint = suggest_center(f, freq, near_theta, n0, schedule,
                                   scan_grid=int(block.get("scan_grid", 16)),
                                   beta=beta, eta=eta, probe_halfwidth=probe)
    except RuntimeError as exc:
        raise HypothesisFailure(str(exc)) from exc
    gamma = block.get("gamma")
    if gamma is None:
        est = lyapunov_finite(f, freq, z, max(100, 2 * n0), 100, seed)
        gamma = est.value - 3 * est.std_error
    gamma = float(gamma)
    try:
        state = find_base_state(f, freq, z, n0, schedule, gamma,
                                beta=beta, eta=eta, x_hint=x_hint)
    except RuntimeError as exc:
        raise HypothesisFailure(str(exc)) from exc
    report = verify_conditions_ABCD(state, schedule, f, freq,
                                    samples=int(block.get("samples", 40)),
                                    seed=seed, beta=beta, eta=eta)
    out = {
        "theta_center": z.theta,
        "depth0": {
            "A": [str(c) for c in report.a_checks],
            "B": [str(c) for c in report.b_checks],
            "C": [str(c) for c in report.c_checks],
            "D": [str(c) for c in report.d_checks],
            "all_ok": report.all_ok,
        },
        "gamma": gamma,
        "base_phase": [float(v) for v in state.base_x.coords],
    }
    if depth >= 1:
        new_state, adv = inductive_advance(state, schedule, f, freq, seed=seed,
                                           beta=beta, eta=eta)
        out["advance"] = {
            "ok": adv.ok,
            "window": list(adv.window) if adv.window else None,
            "failures": adv.failures(),
            "checks": [str(c) for c in adv.checks],
        }
    (outdir / "multiscale.json").write_text(_canonical(out) + "\n",
                                            encoding="utf-8")
    return 0


def cmd_identity_suite(cfg: dict, outdir: Path, seed: int) -> int:
    block = cfg.get("identity", {})
    cases = int(block.get("cases", 25))
    threshold = float(block.get("threshold", 1e-8))
    f = resolve_sampling(cfg)
    freq = resolve_frequency(cfg, f.dim)
    results = []

    worst_unitary = 0.0
    worst_factor = 0.0
    for c in range(cases):
        rng = counter_rng(seed, 1, c)
        x = Phase(tuple(rng.random(f.dim)))
        seq = VerblunskySequence(f, freq, x)
        n = int(rng.integers(4, 40))
        beta = complex(np.exp(2j * np.pi * rng.random()))
        eta = complex(np.exp(2j * np.pi * rng.random()))
        m = build_finite_cmv(seq, 0, n - 1, beta=beta, eta=eta)
        E = m.dense()
        worst_unitary = max(worst_unitary, float(np.max(np.abs(
            E.conj().T @ E - np.eye(n)))))
        worst_factor = max(worst_factor, float(np.max(np.abs(
            E - m.l_dense() @ m.m_dense()))))
    results.append({"case": "unitarity", "residual": worst_unitary,
                    "threshold": 1e-12})
    results.append({"case": "factorization", "residual": worst_factor,
                    "threshold": 1e-13})

    worst_rel = 0.0
    for c in range(cases):
        rng = counter_rng(seed, 2, c)
        x = reduce_phase(rng.random(f.dim))
        n = int(rng.integers(2, 16))
        z = SpectralPoint(float(2 * np.pi * rng.random()))
        try:
            worst_rel = max(worst_rel, relation_residual(f, freq, z, x, n))
        except ValueError:
            continue
    results.append({"case": "determinant_transfer", "residual": worst_rel,
                    "threshold": threshold})

    worst_green = 0.0
    for c in range(cases):
        rng = counter_rng(seed, 3, c)
        x = Phase(tuple(rng.random(f.dim)))
        seq = VerblunskySequence(f, freq, x)
        n = int(rng.integers(8, 40))
        z = complex(np.exp(1j * 2 * np.pi * rng.random()))
        j = int(rng.integers(0, n))
        k = int(rng.integers(j, n))
        gv = green_value(seq, 0, n - 1, j, k, z)
        if gv.singular or abs(gv.value) < 1e-12:
            continue
        worst_green = max(worst_green,
                          abs(gv.magnitude - abs(gv.value)) / abs(gv.value))
    results.append({"case": "green_ratio", "residual": worst_green,
                    "threshold": threshold})

    # representative Green-decay scan on one window
    rng = counter_rng(seed, 5)
    x = Phase(tuple(rng.random(f.dim)))
    seq = VerblunskySequence(f, freq, x)
    z = complex(np.exp(1j * 2 * np.pi * rng.random()))
    n_scan = 40
    decay_rows = []
    j0 = n_scan // 2
    for k in range(j0, n_scan):
        gv = green_value(seq, 0, n_scan - 1, j0, k, z)
        mag = gv.magnitude if not gv.singular else np.inf
        decay_rows.append((j0, k, float(np.log(max(mag, 1e-300)))))
    write_csv(outdir / "green_decay.csv", "j,k,log_abs_G", decay_rows)

    worst_poisson = 0.0
    for c in range(cases):
        rng = counter_rng(seed, 4, c)
        x = Phase(tuple(rng.random(f.dim)))
        seq = VerblunskySequence(f, freq, x)
        big_n = 30 + int(rng.integers(0, 8))
        pairs = eigensolve(build_finite_cmv(seq, 0, big_n))
        pair = pairs[int(rng.integers(0, len(pairs)))]
        a = 3 + int(rng.integers(0, 2))
        b = big_n - 3 - int(rng.integers(0, 2))
        m_site = int(rng.integers(a + 1, b))
        res = poisson_residual(seq, a, b, pair.value, pair.vector, (0, big_n),
                               m_site)
        worst_poisson = max(worst_poisson, res)
    results.append({"case": "poisson", "residual": worst_poisson,
                    "threshold": 1e-9})

    (outdir / "identity_suite.json").write_text(
        _canonical({"results": results}) + "\n", encoding="utf-8")
    bad = [r for r in results if r["residual"] > r["threshold"]]
    for r in results:
        print(f"{r['case']}: max residual {r['residual']:.3e} "
              f"(threshold {r['threshold']:.1e})")
    if bad:
        raise RuntimeError("identity residual exceeded threshold: "
                           + ", ".join(r["case"] for r in bad))
    return 0


COMMANDS = {
    "lyapunov": cmd_lyapunov,
    "spectrum-scan": cmd_spectrum_scan,
    "ldt": cmd_ldt,
    "localize": cmd_localize,
    "multiscale": cmd_multiscale,
    "identity-suite": cmd_identity_suite,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cmvspec",
        description="Quasi-periodic CMV spectral experiments")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config or manifest")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="overrides the config seed")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker hint; results are worker-count independent")
    args = parser.parse_args(argv)

    if args.workers is None:
        env = os.environ.get("CMVSPEC_WORKERS")
        args.workers = int(env) if env else (os.cpu_count() or 1)

    try:
        cfg = load_config(args.config, args.command)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        rc = COMMANDS[args.command](cfg, outdir, seed)
        write_manifest(outdir, args.command, cfg, seed)
        return rc
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisFailure, AvalancheHypothesisError) as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (RuntimeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
