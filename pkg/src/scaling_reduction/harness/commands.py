"""CSV-producing commands: simulate, reduce, reconstruct and verify."""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from ..dual import real_array
from ..examples import ExampleSuite, build_suite
from ..integrate import IntegratorConfig, integrate
from ..numcore import coords_of
from ..reduction import pipeline_A, pipeline_B
from ..structures import symplectic_hvf
from .config import Command, RunConfig
from .reports import REPORT_COLUMNS, format_table, reports_rows, write_csv
from .verify import RECONSTRUCTION_ROUTES, default_x0, reconstruction_cases, tolerance_for, verify_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


@dataclass
class CommandResult:
    exit_code: int
    summary: str


def _emit(cfg: RunConfig, header, rows, footer, stdout: TextIO):
    if cfg.out is None:
        write_csv(stdout, header, rows, footer)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, header, rows, footer)


def _pipeline(suite: ExampleSuite, which: str):
    return pipeline_A(suite.pair) if which == "A" else pipeline_B(suite.pair)


def reduced_initial_point(suite: ExampleSuite, x0, which: str) -> np.ndarray:
    """Image of a total-space point in the final base of the chosen pipeline."""
    cp = suite.pair
    if which == "A":
        return real_array(cp.poisson_quotient.project_raw(cp.standard_quotient.project_raw(x0)))
    return real_array(cp.contact_quotient.project_raw(cp.scaling.quotient.project_raw(x0)))


def _statuses(traj):
    status = ["ok"] * len(traj)
    if traj.truncated:
        status[-1] = "domain_exit"
    return status


def _truncation_footer(traj) -> list[str]:
    lines = [f"truncated,{int(traj.truncated)}"]
    if traj.truncated:
        lines.append(f"exit_reason,{traj.exit_reason}")
    return lines


def cmd_simulate(cfg: RunConfig, stdout: TextIO = sys.stdout) -> CommandResult:
    """Integrate the full Hamiltonian field, or with ``reduced`` the final field of a pipeline."""
    suite = build_suite(cfg.suite)
    x0 = default_x0(suite) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
    x0 = coords_of(x0, suite.pair.system.chart)
    if cfg.reduced:
        result = _pipeline(suite, cfg.pipeline)
        field, start = result.field, reduced_initial_point(suite, x0, cfg.pipeline)
    else:
        field, start = symplectic_hvf(suite.pair.system), x0
    traj = integrate(field, start, cfg.t_span, IntegratorConfig(cfg.dt))
    header = ["t", *field.chart.coord_names, "status"]
    rows = [[t, *x, s] for t, x, s in zip(traj.times, traj.states, _statuses(traj))]
    _emit(cfg, header, rows, [f"chart,{field.chart.name}", *_truncation_footer(traj)], stdout)
    code = EXIT_USAGE if traj.truncated else EXIT_OK
    return CommandResult(code, f"{len(traj)} samples on {field.chart.name!r}" +
                         (f"; stopped early: {traj.exit_reason}" if traj.truncated else ""))


def cmd_reduce(cfg: RunConfig, stdout: TextIO = sys.stdout) -> CommandResult:
    """Component table of the final Jacobi pair, reduced field and section at seeded sample points."""
    suite = build_suite(cfg.suite)
    result = _pipeline(suite, cfg.pipeline)
    chart = result.system.chart
    role = "final_a" if cfg.pipeline == "A" else "final_b"
    points = suite.sample(role, np.random.default_rng(cfg.seed), cfg.points)
    names = chart.coord_names
    n = chart.dim
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    header = [*names, *(f"pi_{names[i]}_{names[j]}" for i, j in pairs), *(f"E_{c}" for c in names),
              *(f"X_{c}" for c in names), "h"]
    rows = []
    for y in points:
        pi = real_array(result.system.pi.raw(y))
        rows.append([*y, *(pi[i, j] for i, j in pairs), *real_array(result.system.e.raw(y)),
                     *real_array(result.field.raw(y)), float(real_array(result.hamiltonian.fn(y)))])
    _emit(cfg, header, rows, [f"chart,{chart.name}", f"pipeline,{cfg.pipeline}", f"seed,{cfg.seed}"], stdout)
    return CommandResult(EXIT_OK, f"{len(rows)} sample points on {chart.name!r} (pipeline {cfg.pipeline})")


def cmd_reconstruct(cfg: RunConfig, stdout: TextIO = sys.stdout) -> CommandResult:
    """Reduced curve, horizontal lift, group factor, reconstruction and direct comparison per time step."""
    suite = build_suite(cfg.suite)
    route = cfg.route or RECONSTRUCTION_ROUTES[suite.name][0]
    if cfg.x0 is not None:
        x0 = np.asarray(cfg.x0, dtype=float)
    elif suite.name == "so3":
        x0 = suite.extras["mu0"]
    else:
        x0 = default_x0(suite)
    (case,) = reconstruction_cases(suite, cfg.dt, cfg.t_span, x0, routes=[route])
    rec, direct = case.result, case.direct
    err = rec.errors_against(direct)
    m = err.size
    base, total = rec.gamma.chart, rec.Gamma.chart
    header = ["t", *(f"gamma_{c}" for c in base.coord_names), *(f"phi_{c}" for c in total.coord_names), "alpha",
              *(f"Gamma_{c}" for c in total.coord_names), *(f"direct_{c}" for c in total.coord_names), "err",
              "status"]
    truncated = rec.truncated or direct.truncated or m < max(len(rec.Gamma), len(direct))
    status = ["ok"] * m
    if truncated and m:
        status[-1] = "domain_exit"
    rows = [[rec.times[k], *rec.gamma.states[k], *rec.phi.states[k], rec.alpha[k], *rec.Gamma.states[k],
             *direct.states[k], err[k], status[k]] for k in range(m)]
    max_err = float(err.max(initial=0.0))
    tol = tolerance_for(f"reconstruction/{route}", cfg.tolerances)
    footer = [f"route,{route}", f"s0,{case.problem.s0!r}", f"max_err,{max_err!r}", f"tolerance,{tol!r}",
              f"truncated,{int(truncated)}"]
    reason = rec.gamma.exit_reason or direct.exit_reason
    if truncated:
        footer.append(f"exit_reason,{reason}")
    _emit(cfg, header, rows, footer, stdout)
    summary = f"route {route}: max |Gamma - direct| = {max_err:.3e} over {m} samples"
    if truncated:
        t_end = rec.times[m - 1] if m else cfg.t0
        return CommandResult(EXIT_USAGE, summary + f"; stopped at t = {t_end:.6g}: {reason}")
    return CommandResult(EXIT_OK if max_err < tol else EXIT_CHECK_FAILED, summary)


def cmd_verify(cfg: RunConfig, stdout: TextIO = sys.stdout) -> CommandResult:
    reports = verify_suite(cfg.suite, cfg.seed, cfg.tolerances, n_points=cfg.points, dt=cfg.dt, t_span=cfg.t_span)
    table = format_table(reports)
    if cfg.out is not None:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(fh, REPORT_COLUMNS, reports_rows(reports))
    stdout.write(table + "\n")
    failed = sum(not r.passed for r in reports)
    return CommandResult(EXIT_CHECK_FAILED if failed else EXIT_OK,
                         f"{len(reports) - failed}/{len(reports)} checks passed")


COMMANDS = {
    Command.SIMULATE: cmd_simulate,
    Command.REDUCE: cmd_reduce,
    Command.RECONSTRUCT: cmd_reconstruct,
    Command.VERIFY: cmd_verify,
}


def run(cfg: RunConfig, stdout: Optional[TextIO] = None) -> CommandResult:
    return COMMANDS[cfg.command](cfg, stdout or sys.stdout)
