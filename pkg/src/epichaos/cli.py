"""Experiment front end: config parsing, orchestration, and file emission.

One plain-text config file (flat INI sections: [model], [grid], [initial],
[run]) drives every experiment kind:

  particle   event-driven interacting runs, replicated
  kinetic    one deterministic solve with snapshots
  meanfield  independent-copies runs driven by the solved field
  couple     paired runs measuring the label mismatch
  study      couple repeated over several agent counts + slope fit
  validate   quick self-checks against the bundled references

Every run writes a manifest listing the full configuration, the seed and
every emitted file; rerunning with the same config and seed reproduces all
CSVs byte for byte.  Replicas draw their own child streams, so worker
parallelism changes wall time only.
"""

import argparse
import concurrent.futures
import configparser
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracles
from .core import Label, ModelParams, SeedSpec, TWO_PI
from .initial import InitialCondition, InitialConditionError
from .kinetic import DiscKernel, GridError, GridSpec, field_from_initial, save_field, solve
from .meanfield import FieldOracle, constant_oracle, run_ensemble
from .coupling import mismatch_bound, run_coupled, sample_coupled_initial
from .observables import empirical_marginal, ensemble_aggregate
from .particle import ConfigError, run, sample_initial

KINDS = ("particle", "kinetic", "meanfield", "couple", "study", "validate")

_MODEL_KEYS = {"n", "d", "r0", "lambda", "gamma"}
_GRID_KEYS = {"m", "k", "dt"}
_INITIAL_KEYS = {"s", "i", "r", "velocity", "weights", "labels_csv"}
_RUN_KEYS = {"t", "sample_times", "replicas", "seed", "n_values",
             "snapshot_times", "nf_stride", "interaction", "cell_counts", "threads"}


@dataclass
class RunConfig:
    """Validated experiment description."""

    kind: str
    model: ModelParams
    initial: InitialCondition
    grid: GridSpec | None
    t_max: float
    sample_times: list
    replicas: int
    seed: int
    n_values: list
    snapshot_times: list
    nf_stride: int
    interaction: str
    cell_counts: bool
    threads: int
    raw: dict = field(default_factory=dict)


def _parse_floats(text):
    return [float(tok) for tok in text.split()]


def _parse_matrix(text):
    return [[float(tok) for tok in row.split()] for row in text.split(";")]


def parse_config(text: str, kind: str = "particle") -> RunConfig:
    """Parse and validate a config file; collects every violation.

    Raises ConfigError whose message lists each offending key as
    ``section.key: reason``.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from exc

    errors = []

    def fail(key, reason):
        errors.append(f"{key}: {reason}")

    for section in cp.sections():
        if section not in ("model", "grid", "initial", "run"):
            fail(section, "unknown section")
    known = {"model": _MODEL_KEYS, "grid": _GRID_KEYS,
             "initial": _INITIAL_KEYS, "run": _RUN_KEYS}
    for section, keys in known.items():
        if cp.has_section(section):
            for key in cp[section]:
                if key not in keys:
                    fail(f"{section}.{key}", "unknown key")

    def get(section, key, cast, default=None, required=False):
        if not cp.has_section(section) or key not in cp[section]:
            if required:
                fail(f"{section}.{key}", "missing required key")
            return default
        rawval = cp[section][key]
        try:
            return cast(rawval)
        except (ValueError, TypeError) as exc:
            fail(f"{section}.{key}", f"cannot parse {rawval!r}: {exc}")
            return default

    n = get("model", "n", int, required=True)
    d = get("model", "d", float, required=True)
    r0 = get("model", "r0", float, required=True)
    lam = get("model", "lambda", float, required=True)
    gamma = get("model", "gamma", float, required=True)
    model = None
    if not errors:
        try:
            model = ModelParams(n=n, side=d, radius=r0,
                                infection_rate=lam, recovery_rate=gamma)
        except ValueError as exc:
            for part in str(exc).split("; "):
                name = part.split(" ", 1)[0]
                keymap = {"n": "n", "side": "d", "radius": "r0",
                          "infection_rate": "lambda", "recovery_rate": "gamma"}
                fail(f"model.{keymap.get(name, name)}", part)

    grid = None
    needs_grid = kind in ("kinetic", "meanfield", "couple", "study")
    if cp.has_section("grid") or needs_grid:
        gm = get("grid", "m", int, required=needs_grid)
        gk = get("grid", "k", int, required=needs_grid)
        gdt = get("grid", "dt", float, required=needs_grid)
        if gm is not None and gk is not None and gdt is not None and d is not None:
            try:
                grid = GridSpec(m=gm, k=gk, dt=gdt, side=d)
            except GridError as exc:
                fail("grid", str(exc))

    s_frac = get("initial", "s", float, default=1.0)
    i_frac = get("initial", "i", float, default=0.0)
    r_frac = get("initial", "r", float, default=0.0)
    velocity = get("initial", "velocity", str, default="uniform")
    weights = get("initial", "weights", _parse_matrix)
    labels_csv = get("initial", "labels_csv", str)
    initial = None
    if not errors:
        vel = "uniform"
        if velocity != "uniform":
            parts = velocity.split()
            if len(parts) == 2 and parts[0] == "delta":
                vel = float(parts[1])
            else:
                fail("initial.velocity", f"expected 'uniform' or 'delta <angle>', got {velocity!r}")
        fractions = (s_frac, i_frac, r_frac)
        if labels_csv is not None:
            try:
                table = np.loadtxt(labels_csv, delimiter=",", ndmin=2)
                m0 = int(round(math.sqrt(table.shape[0])))
                fractions = table.reshape(m0, m0, 3)
            except OSError as exc:
                fail("initial.labels_csv", str(exc))
        if not errors:
            try:
                initial = InitialCondition(side=d, fractions=fractions,
                                           weights=weights, velocity=vel)
            except InitialConditionError as exc:
                fail("initial", str(exc))

    t_max = get("run", "t", float, required=True)
    sample_times = get("run", "sample_times", _parse_floats)
    replicas = get("run", "replicas", int, default=1)
    seed = get("run", "seed", int, default=0)
    n_values = get("run", "n_values", lambda s: [int(tok) for tok in s.split()],
                   required=(kind == "study"), default=[])
    snapshot_times = get("run", "snapshot_times", _parse_floats, default=None)
    nf_stride = get("run", "nf_stride", int, default=10)
    interaction = get("run", "interaction", str, default="per_agent")
    cell_counts = get("run", "cell_counts", lambda s: s.lower() in ("1", "true", "yes"),
                      default=False)
    threads = get("run", "threads", int, default=1)

    if t_max is not None and t_max < 0:
        fail("run.t", f"must be >= 0, got {t_max}")
    if sample_times is None and t_max is not None:
        sample_times = [0.0, t_max]
    if sample_times is not None and t_max is not None:
        for ts in sample_times:
            if ts < 0 or ts > t_max:
                fail("run.sample_times", f"time {ts} outside [0, {t_max}]")
        if sorted(sample_times) != sample_times:
            fail("run.sample_times", "must be sorted")
    if snapshot_times is None and t_max is not None:
        snapshot_times = [t_max]
    if replicas is not None and replicas < 1:
        fail("run.replicas", f"must be >= 1, got {replicas}")
    if interaction not in ("per_agent", "pair"):
        fail("run.interaction", f"must be per_agent or pair, got {interaction!r}")
    if threads is not None and threads < 1:
        fail("run.threads", f"must be >= 1, got {threads}")
    if nf_stride is not None and nf_stride < 1:
        fail("run.nf_stride", f"must be >= 1, got {nf_stride}")
    if kind == "study" and not errors and not n_values:
        fail("run.n_values", "study needs at least one agent count")

    if errors:
        raise ConfigError("invalid config:\n  " + "\n  ".join(errors))

    raw = {sec: dict(cp[sec]) for sec in cp.sections()}
    return RunConfig(kind=kind, model=model, initial=initial, grid=grid,
                     t_max=t_max, sample_times=sample_times, replicas=replicas,
                     seed=seed, n_values=n_values, snapshot_times=snapshot_times,
                     nf_stride=nf_stride, interaction=interaction,
                     cell_counts=cell_counts, threads=threads, raw=raw)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _config_fingerprint(cfg: RunConfig) -> dict:
    return {
        "model": {"n": cfg.model.n, "d": cfg.model.side, "r0": cfg.model.radius,
                  "lambda": cfg.model.infection_rate, "gamma": cfg.model.recovery_rate},
        "grid": None if cfg.grid is None else
                {"m": cfg.grid.m, "k": cfg.grid.k, "dt": cfg.grid.dt},
        "initial": {
            "side": cfg.initial.side,
            "fractions": np.asarray(cfg.initial.fractions, dtype=float).tolist(),
            "weights": None if cfg.initial.weights is None
                       else np.asarray(cfg.initial.weights, dtype=float).tolist(),
            "velocity": cfg.initial.velocity if cfg.initial.velocity == "uniform"
                        else float(cfg.initial.velocity),
        },
        "t": cfg.t_max,
        "nf_stride": cfg.nf_stride,
    }


def _solve_oracle(cfg: RunConfig, out: Path, files: list) -> FieldOracle:
    """Solve the field once per (model, grid, initial, horizon); cache on disk."""
    key_src = json.dumps(_config_fingerprint(cfg), sort_keys=True)
    key = hashlib.sha256(key_src.encode()).hexdigest()[:16]
    cache_dir = out / "cache"
    cache_dir.mkdir(parents=True, exist_ok=True)
    cache = cache_dir / f"kinetic_{key}.npz"
    files.append(str(cache.relative_to(out)))
    if cache.exists():
        data = np.load(cache)
        return FieldOracle(data["nf_times"], data["nf_values"], cfg.model.side)
    f0 = field_from_initial(cfg.initial, cfg.grid)
    traj = solve(f0, cfg.model, cfg.grid, cfg.t_max, nf_stride=cfg.nf_stride)
    np.savez(cache, nf_times=traj.nf_times, nf_values=traj.nf_values,
             mass_times=traj.mass_times, masses=traj.masses)
    return FieldOracle(traj.nf_times, traj.nf_values, cfg.model.side)


def _particle_replica(args):
    cfg, rid = args
    seed = SeedSpec(cfg.seed).child(rid)
    state = sample_initial(cfg.initial, cfg.model.n, seed.child(0).rng())
    obs = None
    if cfg.cell_counts:
        m = cfg.grid.m if cfg.grid is not None else 8

        def obs(st):
            marg = empirical_marginal(st, m, 1, cfg.model.side)
            return marg.counts.sum(axis=3)
    traj = run(state, cfg.model, cfg.t_max, cfg.sample_times, seed.child(1),
               interaction=cfg.interaction, observer=obs)
    return traj.times, traj.counts, traj.extras


def _meanfield_replica(args):
    cfg, oracle, rid = args
    seed = SeedSpec(cfg.seed).child(rid)
    traj = run_ensemble(cfg.model.n, cfg.initial, oracle, cfg.model,
                        cfg.t_max, cfg.sample_times, seed)
    return traj.times, traj.counts, traj.extras


def _couple_replica(args):
    cfg, oracle, rid, n = args
    seed = SeedSpec(cfg.seed).child(n, rid)
    state = sample_coupled_initial(cfg.initial, n, seed.child(0).rng())
    traj = run_coupled(state, cfg.model.with_n(n), oracle, cfg.t_max,
                       cfg.sample_times, seed.child(1))
    return traj.times, traj.mismatch, traj.counts_a, traj.counts_b


def _pool_map(task, jobs, threads):
    if threads <= 1:
        return [task(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


def _run_particle_like(cfg: RunConfig, out: Path, files: list, task) -> None:
    if task is _particle_replica:
        jobs = [(cfg, rid) for rid in range(cfg.replicas)]
    else:
        oracle = _solve_oracle(cfg, out, files)
        jobs = [(cfg, oracle, rid) for rid in range(cfg.replicas)]
    results = _pool_map(task, jobs, cfg.threads)
    rows = []
    cell_rows = []
    for rid, (times, counts, extras) in enumerate(results):
        for j, t in enumerate(times):
            rows.append((rid, float(t), counts[j, 0], counts[j, 1], counts[j, 2]))
            if cfg.cell_counts and extras:
                cells = extras[j]
                m = cells.shape[1]
                for ix in range(m):
                    for iy in range(m):
                        cell_rows.append((rid, float(t), ix, iy,
                                          cells[0, ix, iy], cells[1, ix, iy],
                                          cells[2, ix, iy]))
    _write_csv(out / "observations.csv",
               ["replica", "time", "s", "i", "r"], rows)
    files.append("observations.csv")
    if cell_rows:
        _write_csv(out / "cells.csv",
                   ["replica", "time", "ix", "iy", "s", "i", "r"], cell_rows)
        files.append("cells.csv")
    if cfg.replicas >= 2:
        times = results[0][0]
        stack = np.array([counts for _, counts, _ in results], dtype=float)
        srows = []
        for j, t in enumerate(times):
            row = [float(t)]
            for c in range(3):
                mean, half, _ = ensemble_aggregate(stack[:, j, c])
                row += [float(mean[0]), float(half[0])]
            srows.append(tuple(row))
        _write_csv(out / "summary.csv",
                   ["time", "s_mean", "s_ci", "i_mean", "i_ci", "r_mean", "r_ci"], srows)
        files.append("summary.csv")


def _run_kinetic(cfg: RunConfig, out: Path, files: list) -> None:
    f0 = field_from_initial(cfg.initial, cfg.grid)
    traj = solve(f0, cfg.model, cfg.grid, cfg.t_max,
                 snapshot_times=cfg.snapshot_times, nf_stride=cfg.nf_stride)
    _write_csv(out / "masses.csv", ["time", "s_mass", "i_mass", "r_mass"],
               [(float(t), *map(float, m))
                for t, m in zip(traj.mass_times, traj.masses)])
    files.append("masses.csv")
    snap_rows = []
    for t, fld in zip(traj.snapshot_times, traj.snapshots):
        name = f"field_{t:.6f}.bin"
        save_field(out / name, fld)
        files.append(name)
        snap_rows.append((float(t), name, *map(float, fld.label_masses())))
    _write_csv(out / "snapshots.csv",
               ["time", "file", "s_mass", "i_mass", "r_mass"], snap_rows)
    files.append("snapshots.csv")


def _run_couple(cfg: RunConfig, out: Path, files: list, n_values=None) -> dict:
    oracle = _solve_oracle(cfg, out, files)
    n_values = n_values or [cfg.model.n]
    rows = []
    summaries = {}
    for n in n_values:
        jobs = [(cfg, oracle, rid, n) for rid in range(cfg.replicas)]
        results = _pool_map(_couple_replica, jobs, cfg.threads)
        for rid, (times, mism, ca, cb) in enumerate(results):
            for j, t in enumerate(times):
                rows.append((n, rid, float(t), float(mism[j]),
                             ca[j, 0], ca[j, 1], ca[j, 2],
                             cb[j, 0], cb[j, 1], cb[j, 2]))
        stack = np.array([mism for _, mism, _, _ in results])
        times = results[0][0]
        summaries[n] = (times, stack)
    _write_csv(out / "observations.csv",
               ["n", "replica", "time", "mismatch",
                "s_a", "i_a", "r_a", "s_b", "i_b", "r_b"], rows)
    files.append("observations.csv")
    srows = []
    for n, (times, stack) in summaries.items():
        if stack.shape[0] >= 2:
            mean, half, _ = ensemble_aggregate(stack)
            for j, t in enumerate(times):
                srows.append((n, float(t), float(mean[j]), float(half[j]),
                              mismatch_bound(float(t), cfg.model.infection_rate, n)))
    if srows:
        _write_csv(out / "summary.csv",
                   ["n", "time", "mismatch_mean", "mismatch_ci", "bound"], srows)
        files.append("summary.csv")
    return summaries


_GNUPLOT_TEMPLATE = """# mismatch scaling, log-log
set logscale xy
set xlabel 'agents n'
set ylabel 'mean mismatch'
set datafile separator ','
plot 'summary.csv' using 1:($2=={time} ? $3 : 1/0) with linespoints title 'measured', \\
     'summary.csv' using 1:($2=={time} ? $5 : 1/0) with lines title 'bound'
"""


def fit_loglog_slope(n_values, means):
    """OLS slope of log(mean) on log(n) with its standard error."""
    xs = np.log(np.asarray(n_values, dtype=float))
    ys = np.log(np.asarray(means, dtype=float))
    xbar, ybar = xs.mean(), ys.mean()
    sxx = ((xs - xbar) ** 2).sum()
    slope = ((xs - xbar) * (ys - ybar)).sum() / sxx
    icept = ybar - slope * xbar
    resid = ys - (icept + slope * xs)
    dof = max(1, xs.size - 2)
    se = math.sqrt((resid ** 2).sum() / dof / sxx)
    return slope, se


def _run_study(cfg: RunConfig, out: Path, files: list) -> None:
    summaries = _run_couple(cfg, out, files, n_values=cfg.n_values)
    slope_rows = []
    for t_idx, t in enumerate(summaries[cfg.n_values[0]][0]):
        means = [summaries[n][1][:, t_idx].mean() for n in cfg.n_values]
        if min(means) <= 0:
            continue
        slope, se = fit_loglog_slope(cfg.n_values, means)
        slope_rows.append((float(t), float(slope), float(se),
                           float(slope - 1.96 * se), float(slope + 1.96 * se)))
    _write_csv(out / "slope.csv",
               ["time", "slope", "stderr", "ci95_lo", "ci95_hi"], slope_rows)
    files.append("slope.csv")
    if slope_rows:
        with open(out / "plot.gp", "w") as fh:
            fh.write(_GNUPLOT_TEMPLATE.format(time=_fmt(slope_rows[-1][0])))
        files.append("plot.gp")


def _validate_checks(cfg: RunConfig):
    """Quick oracle suite: yields (name, passed, detail)."""
    seed = SeedSpec(cfg.seed)

    rng = seed.child(0).rng()
    from .core import TorusGeometry, torus_distance
    geom = TorusGeometry(1.0)
    pts = rng.random((200, 3, 2))
    sym = triangle = True
    for p in pts:
        d01 = torus_distance(p[0], p[1], geom)
        d10 = torus_distance(p[1], p[0], geom)
        d02 = torus_distance(p[0], p[2], geom)
        d12 = torus_distance(p[1], p[2], geom)
        sym &= d01 == d10
        triangle &= d02 <= d01 + d12 + 1e-12
    yield "torus_metric", bool(sym and triangle), "symmetry and triangle inequality"

    draws = seed.child(1).rng().random(100_000) * TWO_PI
    hist = np.bincount((draws / (TWO_PI / 36)).astype(int), minlength=36)
    expected = draws.size / 36
    chi2 = float(((hist - expected) ** 2 / expected).sum())
    from scipy import stats
    p = float(stats.chi2.sf(chi2, 35))
    yield "velocity_uniformity", p > 1e-3, f"chi-square p={p:.4f}"

    params = ModelParams(n=2, side=1.0, radius=1.0, infection_rate=1.0, recovery_rate=0.0)
    reps = 20_000
    hits = 0
    for r in range(reps):
        st = sample_initial(InitialCondition(side=1.0, fractions=(0.0, 1.0, 0.0)),
                            2, seed.child(2, r, 0).rng())
        st.labels[0] = Label.S
        traj = run(st, params, 1.0, [1.0], seed.child(2, r, 1))
        hits += int(traj.counts[-1][1] == 2)
    p_hat = hits / reps
    p_exact = 1.0 - math.exp(-0.5)
    tol = 4.0 * math.sqrt(p_exact * (1 - p_exact) / reps)
    yield ("pair_infection_law", abs(p_hat - p_exact) < tol,
           f"P(both infected)={p_hat:.4f} vs {p_exact:.4f} (tol {tol:.4f})")

    params = ModelParams(n=16, side=1.0, radius=0.1, infection_rate=1.0, recovery_rate=0.5)
    grid = GridSpec(m=16, k=8, dt=2e-3, side=1.0)
    ic = InitialCondition(side=1.0, fractions=(0.9, 0.1, 0.0))
    traj = solve(field_from_initial(ic, grid), params, grid, 1.0)
    kern = DiscKernel(16, 1.0, 0.1)
    beta = params.infection_rate * kern.mask.sum() * (1.0 / 16) ** 2
    _, ode = oracles.sir_ode_solve(beta, 0.5, (0.9, 0.1, 0.0), 1.0, 2e-3)
    err = float(np.abs(traj.masses - ode).max())
    yield "solver_homogeneous", err < 1e-4, f"sup mass error {err:.2e}"

    rng = seed.child(3).rng()
    kern = DiscKernel(32, 1.0, 0.12)
    ok = True
    worst = 0.0
    for _ in range(5):
        rho = rng.random((32, 32))
        ref = oracles.direct_convolution(rho, 0.12, 1.0)
        for backend in (kern.direct, kern.spectral):
            diff = float(np.abs(backend(rho) - ref).max())
            worst = max(worst, diff)
            ok &= diff < 1e-10
    yield "convolution_backends", ok, f"max abs deviation {worst:.2e}"

    orc = constant_oracle(1.0, 0.5, 2.0)
    params = ModelParams(n=20_000, side=1.0, radius=0.1, infection_rate=1.0,
                         recovery_rate=0.0)
    traj = run_ensemble(params.n, InitialCondition(side=1.0, fractions=(1.0, 0.0, 0.0)),
                        orc, params, 2.0, [2.0], seed.child(4))
    frac_s = traj.counts[-1][0] / params.n
    p_exact = math.exp(-0.5 * 2.0)
    tol = 4.0 * math.sqrt(p_exact * (1 - p_exact) / params.n)
    yield ("thinning_law", abs(frac_s - p_exact) < tol,
           f"P(still S)={frac_s:.4f} vs {p_exact:.4f} (tol {tol:.4f})")


def _run_validate(cfg: RunConfig, out: Path, files: list) -> int:
    rows = []
    failures = 0
    for name, passed, detail in _validate_checks(cfg):
        status = "PASS" if passed else "FAIL"
        print(f"{status} {name}: {detail}")
        rows.append((name, status, detail))
        failures += int(not passed)
    _write_csv(out / "validate.csv", ["check", "status", "detail"], rows)
    files.append("validate.csv")
    return failures


def run_experiment(cfg: RunConfig, out_dir) -> int:
    """Execute one experiment kind; returns a process exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    status = 0
    if cfg.kind == "particle":
        _run_particle_like(cfg, out, files, _particle_replica)
    elif cfg.kind == "meanfield":
        _run_particle_like(cfg, out, files, _meanfield_replica)
    elif cfg.kind == "kinetic":
        _run_kinetic(cfg, out, files)
    elif cfg.kind == "couple":
        _run_couple(cfg, out, files)
    elif cfg.kind == "study":
        _run_study(cfg, out, files)
    elif cfg.kind == "validate":
        status = 1 if _run_validate(cfg, out, files) else 0
    manifest = {
        "kind": cfg.kind,
        "version": __version__,
        "seed": cfg.seed,
        "replicas": cfg.replicas,
        "config": cfg.raw,
        "fingerprint": _config_fingerprint(cfg),
        "files": sorted(files),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="epichaos",
        description="agent, field and paired-run experiments for the spatial "
                    "SIR model on a periodic square")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--config", required=True, help="path to the INI config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override [run] seed")
    parser.add_argument("--replicas", type=int, default=None, help="override [run] replicas")
    parser.add_argument("--threads", type=int, default=None, help="override [run] threads")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text, args.kind)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicas is not None:
        cfg.replicas = args.replicas
    if args.threads is not None:
        cfg.threads = args.threads
    try:
        return run_experiment(cfg, args.out)
    except (ConfigError, GridError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
