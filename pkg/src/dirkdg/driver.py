"""Experiment orchestration: single runs, convergence studies and analysis sweeps."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import fourier
from .basis import DGState, Grid1D, project
from .config import ConfigError, RunConfig
from .limiting import bdf_limit
from .problems import ProblemSpec, make_problem, max_wave_speed
from .stepping import StepFailure, StepReport, dirk_dg_step, explicit_step
from .tableaux import make_dirk22, scheme

log = logging.getLogger(__name__)

EXPLICIT_SAFETY = 0.95


class SimulationError(RuntimeError):
    """A time step failed; ``step`` is its 1-based index, ``state`` the last good state."""

    def __init__(self, message: str, step: int, state: Optional[DGState] = None):
        super().__init__(message)
        self.step = step
        self.state = state


def build_problem(config: RunConfig) -> ProblemSpec:
    return make_problem(config.problem, equation=config.equation, a=config.a, beta=config.beta,
                        kappa=config.kappa, viscosity=config.viscosity)


def initial_state(spec: ProblemSpec, grid: Grid1D, p: int) -> DGState:
    return project(spec.initial, grid, p)


def initial_speed(spec: ProblemSpec, state: DGState) -> float:
    """Largest wave speed over the cell means and right traces."""
    moments = state.moments
    return max_wave_speed(spec.model, np.concatenate([moments.sum(axis=1), moments[:, 0, :]]))


def select_timestep(config: RunConfig, spec: ProblemSpec, state: DGState, h: float,
                    explicit: bool) -> float:
    """Time step from the Courant ratio, a fixed ``dt/h``, or 0.95 of the explicit limit."""
    p = state.degree
    dt_cfl = h / ((2 * p + 1) * initial_speed(spec, state))
    if explicit:
        return EXPLICIT_SAFETY * dt_cfl
    if config.dt_mode == "fixed":
        return config.dt_over_h * h
    return config.r * dt_cfl


@dataclass
class SimulationResult:
    config: RunConfig
    spec: ProblemSpec
    grid: Grid1D
    initial: DGState
    state: DGState
    dt: float
    delta: int
    reports: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def steps(self) -> int:
        return len(self.reports)

    def exact_means(self) -> np.ndarray:
        if self.spec.exact is None:
            raise ValueError(f"problem {self.spec.name!r} has no exact solution")
        t = self.state.time
        exact = project(lambda x: self.spec.exact(x, t), self.grid, 0)
        return exact.moments[:, 0, :]

    def l1_error(self, component: int = 0) -> float:
        """``h * sum_j |mean_j - exact mean_j|`` for one component."""
        diff = self.state.means[:, component] - self.exact_means()[:, component]
        return float(self.grid.h * np.sum(np.abs(diff)))

    @property
    def max_troubled(self) -> int:
        return max((r.max_troubled for r in self.reports), default=0)

    @property
    def newton_iterations(self) -> int:
        return sum(r.newton_iterations for r in self.reports)

    @property
    def krylov_iterations(self) -> int:
        return sum(r.krylov_iterations for r in self.reports)

    def mean_krylov_per_newton(self) -> float:
        n = self.newton_iterations
        return self.krylov_iterations / n if n else 0.0


def simulate(config: RunConfig) -> SimulationResult:
    """Run one configuration to its final time without writing files."""
    spec = build_problem(config)
    _, tableau = scheme(config.scheme)
    p = config.degree
    grid = Grid1D(config.N, *spec.domain)
    h = grid.h
    state = initial_state(spec, grid, p)
    if config.limiters:
        state = DGState(bdf_limit(state.moments, spec.boundary), 0.0)
    initial = state.copy()
    explicit = tableau.is_explicit
    dt = select_timestep(config, spec, state, h, explicit)
    r_eff = dt * initial_speed(spec, state) / h * (2 * p + 1)
    delta = config.delta if config.delta is not None else int(round(r_eff / (2 * p + 1)))
    T = config.t_final if config.t_final is not None else spec.t_final
    adaptive = config.dt_mode == "ratio" or explicit
    log.info("%s %s N=%d p=%d dt=%.4g delta=%d", spec.name, config.scheme, config.N, p, dt, delta)

    reports: list[StepReport] = []
    start = time.perf_counter()
    n = 0
    while T - state.time > 1e-12 * max(1.0, T):
        if adaptive and n > 0:
            # the wave speed bound follows the current state
            dt = select_timestep(config, spec, state, h, explicit)
        step_dt = min(dt, T - state.time)
        if T - state.time - step_dt < 1e-9 * dt:
            step_dt = T - state.time
        previous = state
        try:
            if explicit:
                state, rep = explicit_step(state, tableau, spec, h, step_dt, config.limiters)
            else:
                state, rep = dirk_dg_step(
                    state, tableau, spec, h, step_dt, config.solver, delta=delta,
                    limiters=config.limiters, mask_rule=config.mask_rule, tvb_m=config.tvb_m,
                    exact_affine=config.exact_affine)
        except StepFailure as exc:
            raise SimulationError(f"step {n + 1} at t={state.time:.6g}: {exc}", n + 1,
                                  state) from exc
        n += 1
        if not state.is_finite():
            raise SimulationError(f"step {n}: non-finite solution", n, previous)
        reports.append(rep)
    state = DGState(state.moments, T)
    wall = time.perf_counter() - start
    return SimulationResult(config, spec, grid, initial, state, dt, delta, reports, wall)


# ---------------------------------------------------------------------------
# CSV output


def _write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_solution(result: SimulationResult, path) -> None:
    moments = result.state.moments
    N, P, m = moments.shape
    header = ["x"] + [f"mean_{c}" for c in range(m)] + [
        f"u{l}_{c}" for l in range(P) for c in range(m)]
    rows = [[x, *moments[j, 0, :], *moments[j].ravel()] for j, x in enumerate(result.grid.centers)]
    _write_csv(path, header, rows)


def write_reports(result: SimulationResult, path) -> None:
    header = ["step", "time", "dt", "courant", "ratio", "troubled", "newton", "krylov"]
    rows = [[i + 1, r.time, r.dt, r.courant, r.ratio, r.max_troubled, r.newton_iterations,
             r.krylov_iterations] for i, r in enumerate(result.reports)]
    _write_csv(path, header, rows)


def write_exact(result: SimulationResult, path) -> None:
    exact = result.exact_means()
    header = ["x"] + [f"mean_{c}" for c in range(exact.shape[1])]
    _write_csv(path, header, [[x, *exact[j]] for j, x in enumerate(result.grid.centers)])


def run_simulation(config: RunConfig) -> SimulationResult:
    """Simulate and write whichever of the solution, report and exact CSVs are configured."""
    result = simulate(config)
    if config.solution_path:
        write_solution(result, config.solution_path)
    if config.report_path:
        write_reports(result, config.report_path)
    if config.exact_path:
        write_exact(result, config.exact_path)
    return result


# ---------------------------------------------------------------------------
# convergence


@dataclass
class ConvergenceReport:
    grids: list
    errors: list
    troubled: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def rates(self) -> list:
        return [math.log2(self.errors[i] / self.errors[i + 1]) for i in range(len(self.errors) - 1)]

    @property
    def mean_rate(self) -> float:
        return float(np.mean(self.rates))

    def rows(self):
        rates = [None] + self.rates
        return [[n, e, r, t] for n, e, r, t in zip(self.grids, self.errors, rates, self.troubled)]


def run_convergence(template: RunConfig, grids: Sequence[int], component: int = 0,
                    output: Optional[str] = None) -> ConvergenceReport:
    """L1 errors of the cell means on successively doubled grids."""
    grids = list(grids)
    if len(grids) < 2:
        raise ConfigError("grids", "at least two grids are required")
    for a, b in zip(grids, grids[1:]):
        if b != 2 * a:
            raise ConfigError("grids", f"grids must double: {a} -> {b}")
    if build_problem(template).exact is None:
        raise ConfigError("problem", f"{template.problem!r} has no exact solution")
    report = ConvergenceReport([], [])
    start = time.perf_counter()
    for N in grids:
        res = simulate(replace(template, N=N))
        report.grids.append(N)
        report.errors.append(res.l1_error(component))
        report.troubled.append(res.max_troubled)
    report.wall_time = time.perf_counter() - start
    if output:
        rows = [[n, e, "" if r is None else r, t] for n, e, r, t in report.rows()]
        _write_csv(output, ["N", "l1_error", "rate", "max_troubled"], rows)
    return report


# ---------------------------------------------------------------------------
# Fourier analysis and stability


def default_wave_numbers(count: int = 200) -> np.ndarray:
    return np.linspace(math.pi / count, math.pi, count)


def run_analysis(scheme_id: str, ratios: Sequence[float], Ks=None, p: Optional[int] = None,
                 outdir: Optional[str] = None, a: float = 1.0, beta: float = 1.0) -> dict:
    """Measure tables for each Courant ratio; one CSV per ratio when ``outdir`` is set."""
    p_default, tableau = scheme(scheme_id)
    p = p_default if p is None else p
    if tableau.is_explicit:
        raise ConfigError("scheme", "the amplification analysis needs a DIRK scheme")
    Ks = default_wave_numbers() if Ks is None else np.asarray(Ks, dtype=float)
    tables = {}
    for r in ratios:
        rows = fourier.sweep_measures(p, tableau, 1.0, r, Ks, a, beta)
        tables[r] = rows
        if outdir:
            _write_csv(Path(outdir) / f"{scheme_id}_r{r:g}.csv", list(rows[0]),
                       [list(row.values()) for row in rows])
    return tables


def gamma_sweep(gammas: Sequence[float], r: float, Ks=None, output: Optional[str] = None) -> list:
    """``(gamma, K, m_disp, m_diss)`` rows for the 2-stage family with P1."""
    Ks = default_wave_numbers() if Ks is None else np.asarray(Ks, dtype=float)
    rows = []
    for g in gammas:
        for row in fourier.sweep_measures(1, make_dirk22(float(g)), 1.0, r, Ks):
            rows.append([float(g), row["K"], row["m_disp"], row["m_diss"]])
    if output:
        _write_csv(output, ["gamma", "K", "m_disp", "m_diss"], rows)
    return rows


def run_stability(scheme_id: str, output: Optional[str] = None,
                  samples: int = 600) -> fourier.StabilityScan:
    """Scan ``|R(z)|`` on the standard rectangle; optional CSV of the region mask."""
    _, tableau = scheme(scheme_id)
    scan = fourier.stability_scan(tableau, samples=samples)
    if output:
        X, Y = np.meshgrid(scan.re, scan.im)
        rows = zip(X.ravel(), Y.ravel(), scan.abs_R.ravel(), scan.region.ravel().astype(int))
        _write_csv(output, ["re_z", "im_z", "abs_R", "stable"], rows)
    return scan
