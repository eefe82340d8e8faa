"""Experiment orchestration and the ``layerlab`` command line interface.

Tasks run per sweep value of eps and emit one CSV each; a summary file
collects pass/fail lines and the exit status is zero exactly when nothing
failed.  The config file is flat ``section.key = value`` text.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds, green, perturbed, reduced_wave
from .core import ConfigError, ExponentParams, Grid, ProblemConfig, validate_config
from .fd_oracle import FdScheme, fd_solve

ENV_OUT = "LAYERLAB_OUT"

ALL_TASKS = (
    "certify-green",
    "certify-error",
    "sweep-convergence",
    "cross-validate",
    "emit-fields",
)

_DEFAULTS = {
    "exponents.alpha": 0.8,
    "exponents.beta": 0.5,
    "exponents.delta": 0.9,
    "exponents.gamma": 0.5,
    "grid.nx": 201,
    "grid.nt": 401,
    "grid.t_max": 5.0,
    "modes": 256,
    "tolerances.series_tol": 1e-6,
    "tolerances.cert_margin": 1.0,
    "tolerances.xval_tol": 1e-3,
    "cert.n_space": 101,
    "cert.n_time": 200,
    "cert.t_max": 50.0,
}

_KNOWN_KEYS = set(_DEFAULTS) | {
    "problem.l",
    "problem.c",
    "sweep",
    "outputs",
    "tasks",
    "workers",
}


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemConfig  # eps field holds the first sweep value
    exponents: ExponentParams
    grid: Grid
    sweep: tuple[float, ...]
    modes: int
    series_tol: float
    cert_margin: float
    xval_tol: float
    outputs: str
    tasks: tuple[str, ...]
    workers: int = 1
    emit_plot_data: bool = False
    cert_n_space: int = 101
    cert_n_time: int = 200
    cert_t_max: float = 50.0


def _parse_value(key: str, raw: str):
    ints = {"grid.nx", "grid.nt", "modes", "workers", "cert.n_space", "cert.n_time"}
    if key in ("tasks", "sweep"):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if key == "sweep":
            return tuple(float(s) for s in items)
        return tuple(items)
    if key == "outputs":
        return raw
    if key in ints:
        return int(raw)
    return float(raw)


def parse_config(
    path: str,
    task_overrides: Optional[list[str]] = None,
    out_override: Optional[str] = None,
    emit_plot_data: bool = False,
    workers: Optional[int] = None,
) -> RunConfig:
    """Read and fully validate a flat key = value config file.

    Unknown keys are rejected, not ignored; CLI flags override file values.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    values = dict(_DEFAULTS)
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc

    for req in ("problem.l", "problem.c", "sweep"):
        if req not in values:
            raise ConfigError(f"missing required key {req!r}")

    sweep = values["sweep"]
    if len(sweep) == 0:
        raise ConfigError("sweep must be non-empty")
    if any(e <= 0 for e in sweep):
        raise ConfigError(f"sweep values must be positive, got {sweep}")
    if any(b >= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError(f"sweep must be strictly decreasing, got {sweep}")

    for tk in ("tolerances.series_tol", "tolerances.cert_margin", "tolerances.xval_tol"):
        if values[tk] <= 0:
            raise ConfigError(f"{tk} must be positive, got {values[tk]}")

    cfg = ProblemConfig(l=values["problem.l"], c=values["problem.c"], eps=sweep[0])
    exps = ExponentParams(
        alpha=values["exponents.alpha"],
        beta=values["exponents.beta"],
        delta=values["exponents.delta"],
        gamma=values["exponents.gamma"],
    )
    validate_config(cfg, exps)
    grid = Grid(nx=values["grid.nx"], nt=values["grid.nt"], t_max=values["grid.t_max"])
    if values["modes"] < 1:
        raise ConfigError(f"modes must be >= 1, got {values['modes']}")

    tasks = tuple(task_overrides) if task_overrides else tuple(values.get("tasks", ()))
    for t in tasks:
        if t not in ALL_TASKS:
            raise ConfigError(f"unknown task {t!r}; valid tasks: {', '.join(ALL_TASKS)}")

    outputs = out_override or values.get("outputs") or os.environ.get(ENV_OUT) or "layerlab_out"
    return RunConfig(
        problem=cfg,
        exponents=exps,
        grid=grid,
        sweep=sweep,
        modes=values["modes"],
        series_tol=values["tolerances.series_tol"],
        cert_margin=values["tolerances.cert_margin"],
        xval_tol=values["tolerances.xval_tol"],
        outputs=str(outputs),
        tasks=tasks,
        workers=int(workers if workers is not None else values.get("workers", 1)),
        emit_plot_data=emit_plot_data,
        cert_n_space=values["cert.n_space"],
        cert_n_time=values["cert.n_time"],
        cert_t_max=values["cert.t_max"],
    )


def standing_wave_data(cfg: ProblemConfig) -> reduced_wave.IbcData:
    """Canonical single-mode experiment: f0 = sin(pi x / l), everything else 0."""
    return reduced_wave.IbcData(
        f0=lambda x: np.sin(np.pi * x / cfg.l),
        f1=lambda x: np.zeros_like(x),
    )


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_plot_data(path: Path, xs, ys) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{_fmt(x)} {_fmt(y)}\n")


def _eps_tag(eps: float) -> str:
    return f"{eps:g}"


# ---------------------------------------------------------------------------
# task implementations


def sample_green_max(
    cfg: ProblemConfig,
    t_values: np.ndarray,
    n_space: int,
    tail_target: float,
    n_cap: int = 5000,
) -> np.ndarray:
    """Upper bound on max_{x, xi} |G| at each time: grid max plus certified tail."""
    t_min = float(np.min(t_values))
    N = green._modes_for_tol(t_min, cfg, tail_target, n_cap)
    x = np.linspace(0.0, cfg.l, n_space)
    ns = np.arange(1, N + 1)
    sines = np.sin(np.outer(cfg.gamma_n(ns), x))  # (N, n_space)
    out = np.empty(len(t_values))
    for j, tj in enumerate(t_values):
        amps = green._amplitude_arrays(ns, tj, cfg)
        g = (2.0 / cfg.l) * (sines.T @ (amps[:, None] * sines))
        out[j] = np.max(np.abs(g)) + green.truncation_bound(N, tj, cfg)
    return out


def run_certify_green(rc: RunConfig, eps: float, outdir: Path) -> bool:
    cfg = replace(rc.problem, eps=eps)
    consts = bounds.green_envelope_constants(cfg, rc.exponents)
    nt = rc.cert_n_time
    t = np.linspace(rc.cert_t_max / nt, rc.cert_t_max, nt)
    env = bounds.green_envelope(t, consts, cfg, rc.exponents)
    tail_target = 1e-4 * float(np.min(env))
    sampled = sample_green_max(cfg, t, rc.cert_n_space, tail_target)
    report = bounds.certify(t, sampled, env, rc.cert_margin)
    tag = _eps_tag(eps)
    _write_csv(
        outdir / f"green_cert_eps{tag}.csv",
        ["t", "sampled_max", "envelope", "margin_ratio"],
        zip(report.t, report.sampled_max, report.envelope, report.margin_ratio),
    )
    if rc.emit_plot_data:
        _write_plot_data(outdir / f"green_cert_eps{tag}_sampled.dat", t, sampled)
        _write_plot_data(outdir / f"green_cert_eps{tag}_envelope.dat", t, env)
    return report.passed


def error_term_pipeline(rc: RunConfig, eps: float):
    """Standing-wave error-term run; returns (t, sampled_max, envelope, A)."""
    cfg = replace(rc.problem, eps=eps)
    horizon = bounds.q_epsilon_horizon(cfg, rc.exponents)
    t_max = max(rc.grid.t_max, horizon)
    grid = Grid(nx=rc.grid.nx, nt=rc.grid.nt, t_max=t_max)
    n_modes = min(rc.modes, rc.grid.nx // 2)

    sol = reduced_wave.solve_reduced(standing_wave_data(cfg), cfg, grid, n_modes)
    F = reduced_wave.compute_F(sol, cfg)
    lam, lam_t = reduced_wave.compute_lambda(sol, cfg)
    A = reduced_wave.sup_bound_A(F, lam, lam_t, sol, grid)
    src = reduced_wave.assemble_error_source(sol, F, lam, lam_t, cfg, grid)
    r = perturbed.solve_error_term(src, cfg, grid, perturbed.EXP_DECAY)
    r_abs = np.abs(r.r_modal.reconstruct(cfg).values)

    mask = (grid.t > 0) & (grid.t < horizon)
    t_sub = grid.t[mask]
    sampled = r_abs[:, mask].max(axis=0)
    consts = bounds.error_envelope_constants(cfg, rc.exponents, A)
    env = bounds.error_envelope(t_sub, consts, cfg, rc.exponents)
    return t_sub, sampled, env, A


def run_certify_error(rc: RunConfig, eps: float, outdir: Path) -> bool:
    t, sampled, env, _ = error_term_pipeline(rc, eps)
    report = bounds.certify(t, sampled, env, rc.cert_margin)
    tag = _eps_tag(eps)
    _write_csv(
        outdir / f"error_cert_eps{tag}.csv",
        ["t", "sampled_max", "envelope", "margin_ratio"],
        zip(report.t, report.sampled_max, report.envelope, report.margin_ratio),
    )
    if rc.emit_plot_data:
        _write_plot_data(outdir / f"error_cert_eps{tag}_sampled.dat", t, sampled)
        _write_plot_data(outdir / f"error_cert_eps{tag}_envelope.dat", t, env)
    return report.passed


def spectral_perturbed_solution(rc: RunConfig, eps: float):
    """u_eps = u0 + eps*r on the run grid, standing-wave data."""
    cfg = replace(rc.problem, eps=eps)
    n_modes = min(rc.modes, rc.grid.nx // 2)
    sol = reduced_wave.solve_reduced(standing_wave_data(cfg), cfg, rc.grid, n_modes)
    F = reduced_wave.compute_F(sol, cfg)
    r = perturbed.solve_error_term(F, cfg, rc.grid, perturbed.ADDITIVE)
    u_eps = perturbed.assemble_solution(sol, r, cfg, perturbed.ADDITIVE)
    return sol, r, u_eps


def sweep_max_differences(rc: RunConfig) -> tuple[np.ndarray, float]:
    """max|u_eps - u0| per sweep eps and the fitted log-log order."""
    diffs = []
    for eps in rc.sweep:
        sol, r, u_eps = spectral_perturbed_solution(rc, eps)
        diffs.append(float(np.max(np.abs(u_eps.values - sol.field().values))))
    diffs = np.asarray(diffs)
    order = float(np.polyfit(np.log(np.asarray(rc.sweep)), np.log(diffs), 1)[0])
    return diffs, order


def run_sweep_convergence(rc: RunConfig, outdir: Path) -> bool:
    diffs, order = sweep_max_differences(rc)
    _write_csv(
        outdir / "convergence.csv",
        ["eps", "max_diff_u0", "fitted_order"],
        ((e, d, order) for e, d in zip(rc.sweep, diffs)),
    )
    if rc.emit_plot_data:
        _write_plot_data(outdir / "convergence.dat", rc.sweep, diffs)
    return abs(order - 1.0) <= 0.2


def cross_validate_once(rc: RunConfig, eps: float) -> float:
    """Max difference between the spectral and FD solutions on the run grid."""
    cfg = replace(rc.problem, eps=eps)
    _, _, u_eps = spectral_perturbed_solution(rc, eps)
    scheme = FdScheme.from_grid(rc.grid, cfg)
    u_fd = fd_solve(standing_wave_data(cfg), cfg, scheme, rc.grid)
    return float(np.max(np.abs(u_eps.values - u_fd.values)))


def run_cross_validate(rc: RunConfig, eps: float, outdir: Path) -> bool:
    cfg = replace(rc.problem, eps=eps)
    diff = cross_validate_once(rc, eps)
    _write_csv(
        outdir / f"xval_eps{_eps_tag(eps)}.csv",
        ["eps", "dx", "dt", "max_diff"],
        [(eps, rc.grid.dx(cfg.l), rc.grid.dt, diff)],
    )
    return diff <= rc.xval_tol


def run_emit_fields(rc: RunConfig, eps: float, outdir: Path) -> bool:
    cfg = replace(rc.problem, eps=eps)
    sol, _, u_eps = spectral_perturbed_solution(rc, eps)
    x = rc.grid.x(cfg.l)
    for name, values in (("u0_field", sol.field().values), (f"u_eps_eps{_eps_tag(eps)}", u_eps.values)):
        _write_csv(
            outdir / f"{name}.csv",
            ["t"] + [_fmt(xi) for xi in x],
            ((tj, *values[:, j]) for j, tj in enumerate(rc.grid.t)),
        )
    return True


# ---------------------------------------------------------------------------


def _jobs(rc: RunConfig):
    """(label, callable) pairs; one per (task, eps) where the task sweeps."""
    jobs = []
    outdir = Path(rc.outputs)
    for task in rc.tasks:
        if task == "sweep-convergence":
            jobs.append((task, lambda t=task: run_sweep_convergence(rc, outdir)))
            continue
        for eps in rc.sweep:
            label = f"{task} eps={_eps_tag(eps)}"
            if task == "certify-green":
                fn = lambda e=eps: run_certify_green(rc, e, outdir)
            elif task == "certify-error":
                fn = lambda e=eps: run_certify_error(rc, e, outdir)
            elif task == "cross-validate":
                fn = lambda e=eps: run_cross_validate(rc, e, outdir)
            else:
                fn = lambda e=eps: run_emit_fields(rc, e, outdir)
            jobs.append((label, fn))
    return jobs


def run(rc: RunConfig) -> int:
    """Execute the requested tasks; return the process exit status."""
    outdir = Path(rc.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = _jobs(rc)
    results: list[tuple[str, bool]] = []
    if not jobs:
        (outdir / "summary.txt").write_text("no tasks\n", encoding="utf-8", newline="\n")
        return 0
    if rc.workers > 1:
        with ThreadPoolExecutor(max_workers=rc.workers) as pool:
            futures = [(label, pool.submit(fn)) for label, fn in jobs]
            results = [(label, fut.result()) for label, fut in futures]
    else:
        results = [(label, fn()) for label, fn in jobs]

    failures = [label for label, ok in results if not ok]
    lines = [f"{label}: {'PASS' if ok else 'FAIL'}" for label, ok in results]
    lines.append(f"failures: {len(failures)}")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    if failures:
        print(f"first failing task: {failures[0]}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="layerlab")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute configured tasks")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--task", action="append", default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--emit-plot-data", action="store_true")

    p_check = sub.add_parser("check-config", help="validate a config file")
    p_check.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "check-config":
            parse_config(args.config)
            print("config ok")
            return 0
        rc = parse_config(
            args.config,
            task_overrides=args.task,
            out_override=args.out,
            emit_plot_data=args.emit_plot_data,
            workers=args.workers,
        )
        return run(rc)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
