"""Command-line entry points, config parsing, and run orchestration.

Configs are INI files with ``[section]`` headers, ``key = value`` lines and
``#`` comments. Unknown sections or keys are hard errors. The effective
config (after all defaulting) is echoed into every run directory and parses
back to the same configuration.

Exit codes:
  0  success
  1  a convergence-rate gate failed (verify)
  2  configuration or usage error
  3  an inner linear solve failed to converge
  4  a field became non-finite (NaN/Inf)
  5  file I/O failure
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from io import StringIO
from os import environ
from pathlib import Path

import numpy as np

from . import bench, mms
from .filtering import FILTER_MODES, FilterConfig
from .grid import BoundaryCondition, GridSpec, NonFiniteFieldError, write_fld
from .linsolve import SolverBreakdownError
from .physics import PhysicalParams
from .timeloop import (
    Accumulators,
    RunSinks,
    StepConfig,
    StepConvergenceError,
    initialize,
    read_checkpoint,
    run,
)

__all__ = ["RunConfig", "ConfigError", "parse_config", "render_config", "main"]

EXIT_OK = 0
EXIT_GATE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_NONFINITE = 4
EXIT_IO = 5

_EXIT_DOC = """exit codes:
  0  success
  1  convergence-rate gate failed (verify)
  2  configuration or usage error
  3  inner linear solve failed to converge
  4  non-finite field detected
  5  file I/O failure
"""

_NUM_FMT = "%.17g"


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one invocation."""

    mode: str = "bench"
    case: str | None = "case1"
    mesh: tuple[int, int] | None = (32, 64)
    grid: GridSpec | None = None
    params: PhysicalParams | None = None
    filter: FilterConfig = FilterConfig()
    dt: float = bench.DT
    t_end: float = bench.T_END
    window: tuple[float, float] = bench.AVG_WINDOW
    enstrophy_stride: float = 0.1
    checkpoint_interval: float = 0.0
    snapshot_times: tuple[float, ...] = ()
    output: str | None = None
    workers: int = 1
    solver_tol: float = 1e-8
    solver_max_iter: int = 0
    solver_log: bool = False
    mms_case: str = "ro1-re10"
    mms_meshes: tuple[int, ...] = (32, 64, 128, 256)
    mms_dt_coarsest: float = 1e-3
    mms_t_end: float = 1.0
    mms_solver_tol: float = 1e-12


_SCHEMA = {
    "run": ("mode", "case", "mesh", "output", "workers"),
    "filter": ("mode", "alpha", "indicator_floor"),
    "time": ("dt", "t_end", "avg_start", "avg_end", "enstrophy_stride",
             "checkpoint_interval", "snapshot_times"),
    "grid": ("nx", "ny", "x0", "xf", "y0", "yf"),
    "params": ("ro", "re", "fr", "sigma", "delta", "length"),
    "solver": ("tol", "max_iter", "log"),
    "mms": ("case", "meshes", "dt_coarsest", "t_end", "tol"),
}


def _parser_for(text: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in section [{section}]")
    return cp


def _get(cp, section, key, default=None):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    return default


def _get_float(cp, section, key, default=None):
    raw = _get(cp, section, key)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] must be a number, got {raw!r}") from None


def _get_int(cp, section, key, default=None):
    raw = _get(cp, section, key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section}] must be an integer, got {raw!r}") from None


def _get_bool(cp, section, key, default=False):
    raw = _get(cp, section, key)
    if raw is None:
        return default
    lowered = raw.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key '{key}' in [{section}] must be boolean, got {raw!r}")


def _parse_mesh(raw: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in raw.lower().split("x"))
        return nx, ny
    except ValueError:
        raise ConfigError(f"key 'mesh' must look like '32x64', got {raw!r}") from None


def _parse_float_list(raw: str | None) -> tuple[float, ...]:
    if not raw:
        return ()
    return tuple(float(v) for v in raw.replace(",", " ").split())


def _parse_int_list(raw: str | None) -> tuple[int, ...]:
    if not raw:
        return ()
    return tuple(int(v) for v in raw.replace(",", " ").split())


def parse_config(text: str) -> RunConfig:
    """Parse and validate INI config text into a fully resolved RunConfig."""
    cp = _parser_for(text)

    mode = _get(cp, "run", "mode", "bench")
    if mode not in ("mms", "bench", "custom"):
        raise ConfigError(f"key 'mode' must be one of mms/bench/custom, got {mode!r}")

    fmode = _get(cp, "filter", "mode", "none")
    if fmode not in FILTER_MODES:
        raise ConfigError(f"key 'mode' in [filter] must be one of {FILTER_MODES}, got {fmode!r}")
    alpha = _get_float(cp, "filter", "alpha")
    floor = _get_float(cp, "filter", "indicator_floor", 1e-12)

    case = _get(cp, "run", "case")
    mesh_raw = _get(cp, "run", "mesh")
    output = _get(cp, "run", "output")
    workers = _get_int(cp, "run", "workers", 1)

    grid = params = None
    dt_default, t_end_default = bench.DT, bench.T_END
    window_default = bench.AVG_WINDOW

    if mode == "bench":
        case = case or "case1"
        mesh = _parse_mesh(mesh_raw) if mesh_raw else (32, 64)
        try:
            bcase = bench.make_case(case, mesh, fmode, alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        grid, params = bcase.grid, bcase.params
        if fmode != "none" and alpha is None:
            alpha = bcase.filter.alpha
    elif mode == "custom":
        if not cp.has_section("grid") or not cp.has_section("params"):
            raise ConfigError("custom mode needs [grid] and [params] sections")
        try:
            grid = GridSpec(
                nx=_get_int(cp, "grid", "nx"),
                ny=_get_int(cp, "grid", "ny"),
                x0=_get_float(cp, "grid", "x0", 0.0),
                xf=_get_float(cp, "grid", "xf", 1.0),
                y0=_get_float(cp, "grid", "y0", 0.0),
                yf=_get_float(cp, "grid", "yf", 1.0),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [grid]: {exc}") from None
        try:
            params = PhysicalParams(
                Ro=_get_float(cp, "params", "ro"),
                Re=_get_float(cp, "params", "re"),
                Fr=_get_float(cp, "params", "fr", 0.0),
                sigma=_get_float(cp, "params", "sigma", 0.0),
                delta=_get_float(cp, "params", "delta", 0.5),
                L=_get_float(cp, "params", "length", 1.0),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [params]: {exc}") from None
        mesh = (grid.nx, grid.ny)
        if fmode != "none" and alpha is None:
            raise ConfigError("key 'alpha' in [filter] is required for custom runs with filtering")
    else:  # mms
        mesh = None
        case = None
        window_default = bench.AVG_WINDOW

    if fmode == "none":
        fconf = FilterConfig(mode="none", alpha=0.0, indicator_floor=floor)
    else:
        fconf = FilterConfig(mode=fmode, alpha=float(alpha), indicator_floor=floor)

    mms_case = _get(cp, "mms", "case", "ro1-re10")
    if mms_case != "all" and mms_case not in mms.parameter_sets():
        known = sorted(mms.parameter_sets()) + ["all"]
        raise ConfigError(f"key 'case' in [mms] must be one of {known}, got {mms_case!r}")
    mms_meshes = _parse_int_list(_get(cp, "mms", "meshes")) or (32, 64, 128, 256)

    rc = RunConfig(
        mode=mode,
        case=case,
        mesh=mesh,
        grid=grid,
        params=params,
        filter=fconf,
        dt=_get_float(cp, "time", "dt", dt_default),
        t_end=_get_float(cp, "time", "t_end", t_end_default),
        window=(
            _get_float(cp, "time", "avg_start", window_default[0]),
            _get_float(cp, "time", "avg_end", window_default[1]),
        ),
        enstrophy_stride=_get_float(cp, "time", "enstrophy_stride", 0.1),
        checkpoint_interval=_get_float(cp, "time", "checkpoint_interval", 0.0),
        snapshot_times=_parse_float_list(_get(cp, "time", "snapshot_times")),
        output=output,
        workers=workers,
        solver_tol=_get_float(cp, "solver", "tol", 1e-8),
        solver_max_iter=_get_int(cp, "solver", "max_iter", 0),
        solver_log=_get_bool(cp, "solver", "log", False),
        mms_case=mms_case,
        mms_meshes=mms_meshes,
        mms_dt_coarsest=_get_float(cp, "mms", "dt_coarsest", 1e-3),
        mms_t_end=_get_float(cp, "mms", "t_end", 1.0),
        mms_solver_tol=_get_float(cp, "mms", "tol", 1e-12),
    )
    if rc.dt <= 0:
        raise ConfigError(f"key 'dt' must be positive, got {rc.dt}")
    if rc.workers < 1:
        raise ConfigError(f"key 'workers' must be at least 1, got {rc.workers}")
    return rc


def render_config(rc: RunConfig) -> str:
    """Serialize the effective config; parse_config(render_config(rc)) == rc."""
    out = []
    out.append("[run]")
    out.append(f"mode = {rc.mode}")
    if rc.case is not None:
        out.append(f"case = {rc.case}")
    if rc.mesh is not None:
        out.append(f"mesh = {rc.mesh[0]}x{rc.mesh[1]}")
    if rc.output is not None:
        out.append(f"output = {rc.output}")
    out.append(f"workers = {rc.workers}")
    out.append("")
    out.append("[filter]")
    out.append(f"mode = {rc.filter.mode}")
    if rc.filter.mode != "none":
        out.append(f"alpha = {_NUM_FMT % rc.filter.alpha}")
    out.append(f"indicator_floor = {_NUM_FMT % rc.filter.indicator_floor}")
    out.append("")
    out.append("[time]")
    out.append(f"dt = {_NUM_FMT % rc.dt}")
    out.append(f"t_end = {_NUM_FMT % rc.t_end}")
    out.append(f"avg_start = {_NUM_FMT % rc.window[0]}")
    out.append(f"avg_end = {_NUM_FMT % rc.window[1]}")
    out.append(f"enstrophy_stride = {_NUM_FMT % rc.enstrophy_stride}")
    out.append(f"checkpoint_interval = {_NUM_FMT % rc.checkpoint_interval}")
    if rc.snapshot_times:
        out.append("snapshot_times = " + ", ".join(_NUM_FMT % t for t in rc.snapshot_times))
    out.append("")
    if rc.mode == "custom":
        g = rc.grid
        out.append("[grid]")
        out.append(f"nx = {g.nx}")
        out.append(f"ny = {g.ny}")
        out.append(f"x0 = {_NUM_FMT % g.x0}")
        out.append(f"xf = {_NUM_FMT % g.xf}")
        out.append(f"y0 = {_NUM_FMT % g.y0}")
        out.append(f"yf = {_NUM_FMT % g.yf}")
        out.append("")
        p = rc.params
        out.append("[params]")
        out.append(f"ro = {_NUM_FMT % p.Ro}")
        out.append(f"re = {_NUM_FMT % p.Re}")
        out.append(f"fr = {_NUM_FMT % p.Fr}")
        out.append(f"sigma = {_NUM_FMT % p.sigma}")
        out.append(f"delta = {_NUM_FMT % p.delta}")
        out.append(f"length = {_NUM_FMT % p.L}")
        out.append("")
    out.append("[solver]")
    out.append(f"tol = {_NUM_FMT % rc.solver_tol}")
    out.append(f"max_iter = {rc.solver_max_iter}")
    out.append(f"log = {'true' if rc.solver_log else 'false'}")
    out.append("")
    out.append("[mms]")
    out.append(f"case = {rc.mms_case}")
    out.append("meshes = " + ", ".join(str(n) for n in rc.mms_meshes))
    out.append(f"dt_coarsest = {_NUM_FMT % rc.mms_dt_coarsest}")
    out.append(f"t_end = {_NUM_FMT % rc.mms_t_end}")
    out.append(f"tol = {_NUM_FMT % rc.mms_solver_tol}")
    out.append("")
    return "\n".join(out)


def _merged_config_text(config_path: str | None, overrides: dict) -> str:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    if config_path:
        try:
            text = Path(config_path).read_text()
        except OSError:
            raise
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse error in {config_path}: {exc}") from exc
    for (section, key), value in overrides.items():
        if value is None:
            continue
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, str(value))
    buf = StringIO()
    cp.write(buf)
    return buf.getvalue()


def write_manifest(path: Path, entries: dict) -> None:
    with open(path, "w") as fh:
        for key, value in entries.items():
            fh.write(f"{key} = {value}\n")


def read_manifest(path: Path) -> dict:
    entries = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, value = line.split("=", 1)
                entries[key.strip()] = value.strip()
    return entries


def _step_config_for(rc: RunConfig) -> StepConfig:
    return StepConfig(
        dt=rc.dt,
        params=rc.params,
        filter=rc.filter,
        forcing1=bench.wind_forcing,
        forcing2=0.0,
        q1_bc=BoundaryCondition.of_y(),
        solver_tol=rc.solver_tol,
        solver_max_iter=rc.solver_max_iter or None,
    )


def _finalize_run(outdir: Path, rc: RunConfig, state, acc, wall_seconds: float) -> None:
    avg_dir = outdir / "averages"
    if acc.count > 0:
        avg_dir.mkdir(exist_ok=True)
        for name, fld in acc.averages(state.grid).items():
            write_fld(avg_dir / f"{name}_avg.fld", fld, time=state.t)
    final_dir = outdir / "final"
    final_dir.mkdir(exist_ok=True)
    for name, fld in state.fields().items():
        write_fld(final_dir / f"{name}.fld", fld, time=state.t)
    write_manifest(outdir / "manifest.txt", {
        "mode": rc.mode,
        "case": rc.case or "-",
        "mesh": f"{state.grid.nx}x{state.grid.ny}",
        "filter": rc.filter.mode,
        "alpha": _NUM_FMT % rc.filter.alpha,
        "dt": _NUM_FMT % rc.dt,
        "t_end": _NUM_FMT % rc.t_end,
        "final_time": _NUM_FMT % state.t,
        "avg_window": f"{_NUM_FMT % acc.window[0]},{_NUM_FMT % acc.window[1]}" if acc.window else "-",
        "avg_samples": acc.count,
        "wall_seconds": "%.3f" % wall_seconds,
        "enstrophy_csv": "enstrophy.csv",
        "averages_dir": "averages" if acc.count > 0 else "-",
        "final_dir": "final",
        "status": "completed",
    })


def _execute_run(rc: RunConfig, outdir: Path, resume_from: Path | None = None,
                 quiet: bool = False) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.ini").write_text(render_config(rc))
    cfg = _step_config_for(rc)

    if resume_from is None:
        state = initialize(rc.grid, rc.params)
        acc = Accumulators(window=rc.window, enstrophy_stride=rc.enstrophy_stride)
        t_origin, step_origin, prev_state = state.t, 0, None
    else:
        state, acc, t_origin, step_origin, prev_state = read_checkpoint(resume_from)
        ens = outdir / "enstrophy.csv"
        if ens.exists():
            ens.unlink()  # rewritten from the checkpoint's series

    checkpoint_steps = 0
    if rc.checkpoint_interval > 0:
        checkpoint_steps = max(1, int(round(rc.checkpoint_interval / rc.dt)))
    sinks = RunSinks(
        enstrophy_csv=outdir / "enstrophy.csv",
        snapshot_times=rc.snapshot_times,
        snapshot_dir=outdir / "snapshots",
        checkpoint_every_steps=checkpoint_steps,
        checkpoint_dir=outdir / "checkpoints",
        solver_log_csv=(outdir / "solver_log.csv") if rc.solver_log else None,
    )
    total_steps = int(round((rc.t_end - state.t) / rc.dt))
    report_every = max(1, total_steps // 20)

    def progress(n, current):
        if not quiet and n % report_every == 0:
            print(f"  step {n}, t = {current.t:.4f}", flush=True)

    start = time.perf_counter()
    state, acc = run(
        state, cfg, rc.t_end, acc, sinks,
        t_origin=t_origin, step_origin=step_origin, prev_state=prev_state,
        progress=progress,
    )
    wall = time.perf_counter() - start
    _finalize_run(outdir, rc, state, acc, wall)
    if not quiet:
        print(f"run complete: t = {state.t:g}, wall = {wall:.1f}s, output in {outdir}")


def _run_worker(config_text: str, outdir_str: str) -> str:
    rc = parse_config(config_text)
    _execute_run(rc, Path(outdir_str), quiet=True)
    return outdir_str


def cmd_run(args) -> int:
    overrides = {
        ("run", "mode"): args.mode,
        ("run", "case"): args.case,
        ("run", "mesh"): args.mesh,
        ("run", "output"): args.output,
        ("filter", "mode"): args.filter,
        ("filter", "alpha"): args.alpha,
        ("time", "t_end"): args.t_end,
    }
    rc = parse_config(_merged_config_text(args.config, overrides))
    if rc.mode not in ("bench", "custom"):
        raise ConfigError("the run command handles bench/custom modes; use 'verify' for mms")
    outdir = args.output or rc.output
    if not outdir:
        raise ConfigError("an output directory is required (--output or [run] output)")
    _execute_run(rc, Path(outdir))
    return EXIT_OK


def cmd_bench(args) -> int:
    meshes = [m.strip() for m in args.meshes.split(",") if m.strip()]
    filters = [f.strip() for f in args.filters.split(",") if f.strip()]
    workers = args.workers or int(environ.get("QG2_WORKERS", "0")) or 1
    outroot = Path(args.output)
    jobs = []
    for mesh in meshes:
        for fmode in filters:
            overrides = {
                ("run", "mode"): "bench",
                ("run", "case"): args.case,
                ("run", "mesh"): mesh,
                ("filter", "mode"): fmode,
                ("time", "t_end"): args.t_end,
            }
            if args.alpha is not None and fmode != "none":
                overrides[("filter", "alpha")] = args.alpha
            text = _merged_config_text(args.config, overrides)
            parse_config(text)  # validate before spawning
            outdir = outroot / f"{args.case}_{mesh}_{fmode}"
            jobs.append((text, str(outdir)))

    print(f"bench: {len(jobs)} runs, {workers} worker(s)")
    if workers == 1:
        for text, outdir in jobs:
            print(f"-> {outdir}")
            _run_worker(text, outdir)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done in pool.map(_run_worker, *zip(*jobs)):
                print(f"done: {done}")
    return EXIT_OK


def _read_enstrophy_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    times, e1, e2 = [], [], []
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["t", "E1", "E2"]:
            raise ConfigError(f"{path}: not an enstrophy CSV (header {header})")
        for row in reader:
            times.append(float(row[0]))
            e1.append(float(row[1]))
            e2.append(float(row[2]))
    return np.asarray(times), np.asarray(e1), np.asarray(e2)


def cmd_stats(args) -> int:
    window = tuple(float(v) for v in args.window.split(","))
    if len(window) != 2:
        raise ConfigError(f"--window must be 'start,end', got {args.window!r}")
    ref = None
    if args.reference:
        ref = _read_enstrophy_csv(args.reference)
    lines = []
    for path in args.csv:
        t, e1, e2 = _read_enstrophy_csv(path)
        for name, series in (("E1", e1), ("E2", e2)):
            kwargs = {}
            if ref is not None:
                kwargs = {"ref_times": ref[0], "ref_values": ref[1] if name == "E1" else ref[2]}
            st = bench.enstrophy_stats(t, series, window=window, **kwargs)
            line = (f"{path} {name}: average={st.average:.6e} min={st.minimum:.6e} "
                    f"max={st.maximum:.6e}")
            if st.l2_error is not None:
                line += f" l2_error={st.l2_error:.6e}"
            lines.append(line)
    report = "\n".join(lines)
    print(report)
    if args.output:
        Path(args.output).write_text(report + "\n")
    return EXIT_OK


def _verify_gate(case: str, result: mms.ConvergenceResult) -> list[str]:
    failures = []
    for var in mms.VARIABLES:
        rates = [r for r in result.rates[var] if r is not None]
        if not rates:
            continue
        if case.startswith("ro1-"):
            bad = [r for r in rates if r < 1.9]
            if bad:
                failures.append(f"{case}/{var}: rate(s) below 1.9: "
                                + ", ".join(f"{r:.2f}" for r in bad))
        else:
            mean = sum(rates) / len(rates)
            if mean < 1.6:
                failures.append(f"{case}/{var}: mean rate {mean:.2f} below 1.6")
    return failures


def cmd_verify(args) -> int:
    overrides = {
        ("mms", "case"): args.case,
        ("mms", "meshes"): args.meshes,
        ("mms", "t_end"): args.t_end,
        ("mms", "tol"): args.tol,
    }
    rc = parse_config(_merged_config_text(args.config, overrides))
    sets = mms.parameter_sets()
    cases = sorted(sets) if rc.mms_case == "all" else [rc.mms_case]
    outdir = Path(args.output) if args.output else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)

    failures = []
    for case in cases:
        config = mms.MMSConfig(
            params=sets[case],
            meshes=rc.mms_meshes,
            dt_coarsest=rc.mms_dt_coarsest,
            t_end=rc.mms_t_end,
            solver_tol=rc.mms_solver_tol,
        )
        print(f"verify {case}: meshes {rc.mms_meshes}, t_end {rc.mms_t_end}")

        def progress(n, errs):
            print(f"  mesh 1/{n}: " + "  ".join(f"{v}={errs[v]:.3e}" for v in mms.VARIABLES),
                  flush=True)

        result = mms.run_convergence_study(config, case=case, progress=progress)
        table = mms.format_report(result)
        print(table)
        if outdir:
            mms.write_report_csv(result, outdir / f"verify_{case}.csv")
            (outdir / f"verify_{case}.txt").write_text(table)
        failures.extend(_verify_gate(case, result))

    if failures:
        print("convergence gate FAILED:")
        for f in failures:
            print(f"  {f}")
        return EXIT_GATE
    print("convergence gate passed")
    return EXIT_OK


def cmd_resume(args) -> int:
    rundir = Path(args.run_dir)
    config_path = rundir / "config.ini"
    if not config_path.exists():
        raise ConfigError(f"{rundir} has no config.ini echo to resume from")
    rc = parse_config(config_path.read_text())
    if args.t_end is not None:
        rc = replace(rc, t_end=float(args.t_end))
    ckroot = rundir / "checkpoints"
    candidates = sorted(ckroot.glob("checkpoint_*")) if ckroot.exists() else []
    if not candidates:
        raise ConfigError(f"no checkpoints found under {ckroot}")
    latest = candidates[-1]
    print(f"resuming from {latest}")
    _execute_run(rc, rundir, resume_from=latest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qg2",
        description="Two-layer quasi-geostrophic finite-volume solver with low-pass filtering.",
        epilog=_EXIT_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--seedless", action="store_true",
        help="assert that no randomness is used anywhere (always holds; the "
             "flag exists to state the contract)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="manufactured-solution convergence study")
    p.add_argument("--config", help="INI config path")
    p.add_argument("--case", help="parameter set name or 'all'")
    p.add_argument("--meshes", help="comma list of cells per side, e.g. 32,64,128,256")
    p.add_argument("--t-end", dest="t_end", help="simulated horizon (default 1)")
    p.add_argument("--tol", help="inner solver tolerance (default 1e-12)")
    p.add_argument("--output", help="directory for report CSV/text files")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="single simulation run")
    p.add_argument("--config", help="INI config path")
    p.add_argument("--mode", choices=["bench", "custom"], help="override run mode")
    p.add_argument("--case", help="benchmark case name (case1/case2)")
    p.add_argument("--mesh", help="mesh like 32x64")
    p.add_argument("--filter", choices=list(FILTER_MODES), help="filter mode")
    p.add_argument("--alpha", help="filtering radius")
    p.add_argument("--t-end", dest="t_end", help="simulated horizon")
    p.add_argument("--output", help="run directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="matrix of benchmark runs")
    p.add_argument("--config", help="INI config path")
    p.add_argument("--case", default="case1", help="benchmark case name")
    p.add_argument("--meshes", default="32x64", help="comma list of meshes")
    p.add_argument("--filters", default="none,linear,nonlinear", help="comma list of filter modes")
    p.add_argument("--alpha", help="filtering radius override")
    p.add_argument("--t-end", dest="t_end", help="simulated horizon")
    p.add_argument("--workers", type=int, default=0,
                   help="parallel runs (QG2_WORKERS env as fallback, default 1)")
    p.add_argument("--output", required=True, help="root directory for the run matrix")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="post-hoc enstrophy statistics from CSVs")
    p.add_argument("csv", nargs="+", help="enstrophy CSV file(s)")
    p.add_argument("--window", default="20,100", help="averaging window 'start,end'")
    p.add_argument("--reference", help="reference enstrophy CSV for L2 errors")
    p.add_argument("--output", help="write the report to this file")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("resume", help="continue a run from its latest checkpoint")
    p.add_argument("--run-dir", required=True, help="existing run directory")
    p.add_argument("--t-end", dest="t_end", help="new horizon (default: from config echo)")
    p.set_defaults(func=cmd_resume)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepConvergenceError, SolverBreakdownError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except NonFiniteFieldError as exc:
        print(f"non-finite field: {exc}", file=sys.stderr)
        return EXIT_NONFINITE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
