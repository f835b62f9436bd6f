"""DIRK-DG time stepping with a frozen predictor limiter, and explicit RKDG steps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import DGState
from .jfnk import NewtonConvergenceError, NewtonReport, SolverConfig, jfnk_solve
from .limiting import DEFAULT_TVB_M, TroubleMask, apply_frozen_limiter, bdf_limit, frozen_mp_mask
from .operator import stage_residual
from .problems import LINEAR, InvalidStateError, ProblemSpec, max_wave_speed
from .tableaux import ButcherTableau, derive_predictor


class StepFailure(RuntimeError):
    """A nonlinear solve inside a time step failed."""

    def __init__(self, message: str, stage: int, phase: str, report: NewtonReport | None = None):
        super().__init__(message)
        self.stage = stage
        self.phase = phase
        self.report = report


@dataclass
class StepReport:
    time: float
    dt: float
    courant: float
    ratio: float
    troubled: list = field(default_factory=list)
    predictor_newton: list = field(default_factory=list)
    predictor_krylov: list = field(default_factory=list)
    stage_newton: list = field(default_factory=list)
    stage_krylov: list = field(default_factory=list)
    predictor_failures: int = 0

    @property
    def max_troubled(self) -> int:
        return max(self.troubled, default=0)

    @property
    def newton_iterations(self) -> int:
        return int(sum(self.predictor_newton) + sum(self.stage_newton))

    @property
    def krylov_iterations(self) -> int:
        return int(sum(self.predictor_krylov) + sum(self.stage_krylov))


def degree_scale(P: int, h: float) -> np.ndarray:
    """(2l + 1)/h broadcast against moments of shape (N, P, m)."""
    return ((2.0 * np.arange(P) + 1.0) / h)[None, :, None]


def courant_numbers(spec: ProblemSpec, moments: np.ndarray, h: float, dt: float):
    """Courant number C = max ||f'|| dt / h and ratio r = C (2p + 1)."""
    p = moments.shape[1] - 1
    speed = max_wave_speed(spec.model, np.concatenate([moments.sum(axis=1), moments[:, 0, :]]))
    C = speed * dt / h
    return C, C * (2 * p + 1)


def _solve(G, u0, solver: SolverConfig, affine: bool, stage: int, phase: str,
           tolerate: bool = False):
    try:
        return jfnk_solve(G, u0, solver, affine=affine)
    except NewtonConvergenceError as exc:
        if tolerate:
            return np.array(u0, dtype=float), exc.report
        raise StepFailure(f"{phase} solve of stage {stage + 1}: {exc}", stage, phase,
                          exc.report) from exc
    except InvalidStateError as exc:
        raise StepFailure(f"{phase} solve of stage {stage + 1}: {exc}", stage, phase) from exc


def dirk_dg_step(state: DGState, tableau: ButcherTableau, spec: ProblemSpec, h: float, dt: float,
                 solver: SolverConfig = SolverConfig(), delta: int = 0, limiters: bool = True,
                 mask_rule: str = "extrema", tvb_m: float = DEFAULT_TVB_M,
                 predictor: str = "published", exact_affine: bool = False,
                 stage_guess: str = "predictor") -> tuple[DGState, StepReport]:
    """One step of the s-stage DIRK-DG scheme with frozen predictor limiters.

    The input must already be BDF-limited.  For each stage: a P0 composite
    backward Euler predictor is solved, its MP indicator gives the frozen
    mask, the high-order stage is solved with that mask, then BDF-limited and
    its residual stored.  ``tvb_m`` spares isolated extrema of the predictor
    (see ``frozen_mp_mask``).  ``limiters=False`` skips the mask and the BDF
    passes and yields the plain linear DIRK-DG scheme.  ``exact_affine`` replaces the
    finite-difference Jacobian products by exact differences on linear fluxes.
    A predictor solve that fails (negative increments can make its system
    singular) leaves the previous predictor in place and is counted in the
    report; a failed
    high-order stage raises ``StepFailure``.  With ``stage_guess="predictor"``
    Newton starts each stage from the predictor means with zero higher
    moments; ``"previous"`` starts from the previous stage.
    """
    if not tableau.is_dirk:
        raise ValueError(f"{tableau.name} is not a DIRK tableau")
    if stage_guess not in ("predictor", "previous"):
        raise ValueError(f"unknown stage guess {stage_guess!r}")
    un = np.ascontiguousarray(state.moments, dtype=float)
    N, P, m = un.shape
    bc = spec.boundary
    scale = degree_scale(P, h)
    pred = derive_predictor(tableau, predictor)
    affine = exact_affine and spec.model.code == LINEAR
    C, r = courant_numbers(spec, un, h, dt)
    report = StepReport(state.time + dt, dt, C, r)

    pred_prev = un[:, :1, :].copy()
    stage_prev = un
    Klim = []
    ones = np.ones((N, m))
    for i in range(tableau.stages):
        # composite backward Euler predictor on the means
        inc = pred.increments[i] * dt / h
        base = pred_prev.ravel()

        def G_pred(U, inc=inc, base=base):
            U3 = U.reshape(N, 1, m)
            return U + inc * stage_residual(U3, spec, bc).ravel() - base

        # the predictor only feeds the mask; an unsolvable increment is skipped
        ustar, rep = _solve(G_pred, base, solver, affine, i, "predictor", tolerate=True)
        report.predictor_failures += not rep.converged
        report.predictor_newton.append(rep.iterations)
        report.predictor_krylov.append(rep.total_krylov)
        pred_prev = ustar.reshape(N, 1, m)

        if limiters:
            mask = frozen_mp_mask(pred_prev[:, 0, :], bc, delta, mask_rule, tvb_m, h)
        else:
            mask = TroubleMask(ones, ones, 0)
        report.troubled.append(mask.count)

        # high-order stage with the frozen limiter
        rhs = un.copy()
        for k in range(i):
            rhs -= dt * tableau.a[i, k] * scale * Klim[k]
        rhs = rhs.ravel()
        coef = tableau.a[i, i] * dt * scale
        frozen = mask.count > 0

        def G_stage(U, coef=coef, rhs=rhs, mask=mask, frozen=frozen):
            U3 = U.reshape(N, P, m)
            if frozen:
                U3 = apply_frozen_limiter(U3, mask)
            return U + (coef * stage_residual(U3, spec, bc)).ravel() - rhs

        if stage_guess == "predictor":
            guess = np.zeros_like(un)
            guess[:, 0, :] = pred_prev[:, 0, :]
        else:
            guess = stage_prev
        ui, rep = _solve(G_stage, guess.ravel(), solver, affine, i, "stage")
        report.stage_newton.append(rep.iterations)
        report.stage_krylov.append(rep.total_krylov)
        ui = ui.reshape(N, P, m)
        stage_prev = ui
        if frozen:
            # the stage is the predictor-limited polynomial, then BDF-limited
            ui = apply_frozen_limiter(ui, mask)
        ulim = bdf_limit(ui, bc) if limiters else ui
        Klim.append(stage_residual(ulim, spec, bc))

    unew = un.copy()
    for i in range(tableau.stages):
        unew -= dt * tableau.b[i] * scale * Klim[i]
    if limiters:
        unew = bdf_limit(unew, bc)
    return DGState(unew, state.time + dt), report


def explicit_step(state: DGState, tableau: ButcherTableau, spec: ProblemSpec, h: float,
                  dt: float, limiters: bool = True) -> tuple[DGState, StepReport]:
    """Explicit RKDG step with BDF limiting of every stage and of the result."""
    if not tableau.is_explicit:
        raise ValueError(f"{tableau.name} is not explicit")
    un = np.ascontiguousarray(state.moments, dtype=float)
    bc = spec.boundary
    scale = degree_scale(un.shape[1], h)
    C, r = courant_numbers(spec, un, h, dt)
    report = StepReport(state.time + dt, dt, C, r)
    K = []
    for i in range(tableau.stages):
        ui = un.copy()
        for k in range(i):
            ui -= dt * tableau.a[i, k] * scale * K[k]
        if limiters and i > 0:
            ui = bdf_limit(ui, bc)
        K.append(stage_residual(ui, spec, bc))
        report.troubled.append(0)
    unew = un.copy()
    for i in range(tableau.stages):
        unew -= dt * tableau.b[i] * scale * K[i]
    if limiters:
        unew = bdf_limit(unew, bc)
    return DGState(unew, state.time + dt), report
