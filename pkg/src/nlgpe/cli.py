"""Command-line entry point: ``nlgpe {exact,evolve,verify,sweep}``.

Exit status: 0 success, 1 a verification check failed, 2 configuration or
usage error, 3 non-oscillatory parameters, 4 numerical abort (unstable run,
grid leak, overflow risk, singular fit).
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
import logging
import math
import os
import sys
import time

from . import __version__
from .checks import CHECK_KEYS, evolution_grid, period, run_suite
from .closedform import phase_rate
from .config import RunConfig, format_value, load_config
from .errors import ConfigError, NlgpeError, NonOscillatoryRegime
from .evolve import EvolutionConfig, compare_moments, evolved_residual, split_step_evolve
from .grid import Grid, write_rows
from .model import derive_effective
from .symmetry import displaced_grid, displaced_solution, displacement_params

log = logging.getLogger("nlgpe")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_REGIME, EXIT_NUMERIC = 0, 1, 2, 3, 4


class Manifest:
    """Line-oriented ``key = value`` record of one run; the only file with a timestamp."""

    def __init__(self, workflow: str, cfg: RunConfig):
        self.lines = [f"workflow = {workflow}",
                      f"version = {__version__}",
                      f"created = {datetime.now(timezone.utc).isoformat(timespec='seconds')}"]
        self.lines += [f"config.{line}" for line in cfg.dump().splitlines()]

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key} = {value}")

    def write(self, out_dir: str) -> str:
        path = os.path.join(out_dir, "manifest.txt")
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(self.lines) + "\n")
        return path


def _fmt(v) -> str:
    return format_value(v)


def _adjust_grid(auto: Grid, cfg: RunConfig) -> Grid:
    half = cfg.grid_half_width if cfg.grid_half_width is not None else -auto.x_min
    if cfg.grid_points is not None:
        return Grid.symmetric(half, cfg.grid_points)
    n = max(auto.n, 1 << math.ceil(math.log2(2 * half / auto.dx)))
    return Grid.symmetric(half, n)


# --- workflows ---

def run_exact(cfg: RunConfig, out_dir: str) -> int:
    model = cfg.model
    eff = derive_effective(model)
    grid = _adjust_grid(displaced_grid(cfg.nu, cfg.alpha, eff, model), cfg)
    man = Manifest("exact", cfg)
    man.add("grid", f"x_min={_fmt(grid.x_min)} dx={_fmt(grid.dx)} n={grid.n}")
    for nu in cfg.nu:
        for j, alpha in enumerate(cfg.alpha):
            for k, t in enumerate(cfg.times):
                psi = displaced_solution(nu, alpha, t, eff, model, grid)
                stem = f"nu{nu}_a{j}_t{k}"
                psi.to_csv(os.path.join(out_dir, f"psi_{stem}.csv"))
                psi.density_to_csv(os.path.join(out_dir, f"density_{stem}.csv"))
                desc = f"nu={nu} alpha={_fmt(complex(alpha))} t={_fmt(float(t))}"
                man.add(f"file.psi_{stem}.csv", desc)
                man.add(f"file.density_{stem}.csv", desc)
    man.write(out_dir)
    log.info("wrote %d wave functions to %s", len(cfg.nu) * len(cfg.alpha) * len(cfg.times), out_dir)
    return EXIT_OK


def run_evolve(cfg: RunConfig, out_dir: str) -> int:
    model = cfg.model
    eff = derive_effective(model)
    T = period(eff)
    dt = cfg.dt if cfg.dt is not None else T / 1000
    t_final = cfg.t_final if cfg.t_final is not None else T
    man = Manifest("evolve", cfg)
    for nu in cfg.nu:
        for j, alpha in enumerate(cfg.alpha):
            _, C = displacement_params(alpha, nu, eff, model)
            auto = displaced_grid([nu], [alpha], eff, model)
            if cfg.grid_points is None and cfg.grid_half_width is None:
                grid = evolution_grid(model, eff, dt, [C], n=auto.n)
                if grid.dx > auto.dx * (1 + 1e-12):
                    raise ConfigError(
                        f"{cfg.origins.get('evolve.dt', 'default')}: evolve.dt: {_fmt(dt)} is too "
                        f"large; the kinetic guard would need dx={grid.dx:.4g} but the state "
                        f"needs dx<={auto.dx:.4g}; reduce dt or set grid.points")
            else:
                grid = _adjust_grid(auto, cfg)
            ecfg = EvolutionConfig(dt=dt, t_final=t_final, record_every=cfg.record_every, grid=grid)
            try:
                ecfg.check_guard(model)
            except ValueError as exc:
                raise ConfigError(f"evolve.dt: {exc}") from None
            psi0 = displaced_solution(nu, alpha, 0.0, eff, model, grid)
            t0 = time.perf_counter()
            evo = split_step_evolve(psi0, ecfg, model)
            man.add(f"runtime.nu{nu}_a{j}", f"{time.perf_counter() - t0:.3f}s")
            stem = f"evolve_nu{nu}_a{j}"
            evo.moments_to_csv(os.path.join(out_dir, f"{stem}_moments.csv"))
            for k, psi in enumerate(evo.snapshots):
                name = f"{stem}_snap{k:04d}.csv"
                psi.to_csv(os.path.join(out_dir, name))
                man.add(f"file.{name}", f"nu={nu} alpha={_fmt(complex(alpha))} t={_fmt(evo.times[k])}")
            errs = compare_moments(evo, C, eff, model)
            res = evolved_residual(evo.snapshots[-1], model, eff)
            with open(os.path.join(out_dir, f"{stem}_report.txt"), "w", newline="\n") as fh:
                fh.write(f"relative_residual = {_fmt(res)}\n")
                fh.write(f"norm_drift = {_fmt(evo.norm_drift())}\n")
                for key, v in errs.items():
                    fh.write(f"moment_error.{key} = {_fmt(v)}\n")
                fh.write(f"grid = x_min={_fmt(grid.x_min)} dx={_fmt(grid.dx)} n={grid.n}\n")
                fh.write(f"steps = {ecfg.n_steps}\n")
            man.add(f"file.{stem}_moments.csv", f"nu={nu} alpha={_fmt(complex(alpha))}")
            log.info("%s: norm drift %.2e, max moment error %.2e", stem, evo.norm_drift(),
                     max(errs.values()))
    man.write(out_dir)
    return EXIT_OK


def run_verify(cfg: RunConfig, out_dir: str) -> int:
    derive_effective(cfg.model)
    oracle = cfg.oracle_model()
    if oracle is not None:
        derive_effective(oracle)
    t0 = time.perf_counter()
    results = run_suite(cfg.model, oracle=oracle, seed=cfg.seed, only=set(cfg.criteria))
    man = Manifest("verify", cfg)
    man.add("runtime", f"{time.perf_counter() - t0:.3f}s")
    with open(os.path.join(out_dir, "verify_report.txt"), "w", newline="\n") as fh:
        for r in results:
            fh.write(r.line(stable=True) + "\n")
            if r.volatile:
                man.add(f"volatile.{r.key}", _fmt(r.value))
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    man.add("passed", str(ok).lower())
    man.write(out_dir)
    print("verify:", "all checks passed" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_FAILED


def sweep_point(args):
    """Evaluate one sweep point; returns a row dict.  Never raises for model errors."""
    cfg, value = args
    field = cfg.sweep_key.split(".", 1)[1]
    row = {cfg.sweep_key: value, "status": "ok"}
    try:
        model = cfg.model.replace(**{field: value})
        eff = derive_effective(model)
        row.update(omega_bar=eff.omega_bar, omega=eff.omega, kappa_tilde=eff.kappa_tilde)
        for nu in cfg.nu:
            row[f"phase_rate_nu{nu}"] = phase_rate(nu, eff, model)
        results = run_suite(model, oracle=cfg.oracle_model() and
                            model.replace(kappa=cfg.oracle_kappa),
                            seed=cfg.seed, only=set(cfg.criteria))
        for r in results:
            if not r.volatile:
                row[r.key] = r.value
        row["passed"] = str(all(r.passed for r in results)).lower()
    except (NlgpeError, ValueError) as exc:
        row["status"] = getattr(exc, "code", "invalid")
        row["message"] = str(exc).replace(",", ";")
    return row


def sweep_columns(cfg: RunConfig) -> list[str]:
    cols = [cfg.sweep_key, "status", "omega_bar", "omega", "kappa_tilde"]
    cols += [f"phase_rate_nu{nu}" for nu in cfg.nu]
    cols += [k for k in CHECK_KEYS if k != "c10_runtime_s"]
    return cols + ["passed", "message"]


def run_sweep(cfg: RunConfig, out_dir: str) -> int:
    if not cfg.sweep_values:
        raise ConfigError(f"{cfg.origins.get('sweep.values', 'default')}: sweep.values: "
                          "list must not be empty")
    jobs = [(cfg, v) for v in cfg.sweep_values]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(sweep_point, jobs))  # map keeps input order
    else:
        rows = [sweep_point(j) for j in jobs]
    cols = sweep_columns(cfg)
    write_rows(os.path.join(out_dir, "sweep.csv"), cols,
               ([_cell(row.get(c, "")) for c in cols] for row in rows))
    man = Manifest("sweep", cfg)
    man.add("file.sweep.csv", f"rows={len(rows)}")
    man.write(out_dir)
    bad = [r for r in rows if r["status"] != "ok" or r.get("passed") != "true"]
    for r in rows:
        log.info("%s=%s: %s", cfg.sweep_key, _fmt(r[cfg.sweep_key]),
                 r["status"] if r["status"] != "ok" else f"passed={r['passed']}")
    return EXIT_FAILED if bad else EXIT_OK


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


WORKFLOWS = {"exact": run_exact, "evolve": run_evolve, "verify": run_verify, "sweep": run_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlgpe", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"nlgpe {__version__}")
    sub = p.add_subparsers(dest="workflow", required=True, metavar="{exact,evolve,verify,sweep}")
    helps = {"exact": "write closed-form solutions on a grid",
             "evolve": "evolve displaced states with the split-step integrator",
             "verify": "run the acceptance checks; exit 0 iff all pass",
             "sweep": "run the checks over a range of one model parameter"}
    for name, h in helps.items():
        sp = sub.add_parser(name, help=h)
        sp.add_argument("--config", metavar="PATH", help="dotted-key config file")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides task.out)")
        sp.add_argument("--workers", metavar="N", type=int, help="worker processes (run.workers)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    overrides = {}
    if args.out is not None:
        overrides["task.out"] = args.out
    if args.workers is not None:
        overrides["run.workers"] = args.workers
    try:
        cfg = load_config(args.config, overrides=overrides)
        if cfg.workflow is not None and cfg.workflow != args.workflow:
            raise ConfigError(f"{cfg.origins['task.workflow']}: task.workflow is "
                              f"{cfg.workflow!r} but the subcommand is {args.workflow!r}")
        if cfg.workers < 1:
            raise ConfigError("--workers must be a positive integer")
        os.makedirs(cfg.out, exist_ok=True)
        return WORKFLOWS[args.workflow](cfg, cfg.out)
    except ConfigError as exc:
        print(f"nlgpe: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonOscillatoryRegime as exc:
        print(f"nlgpe: regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NlgpeError as exc:
        print(f"nlgpe: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
