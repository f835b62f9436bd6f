"""Physical fluxes, numerical fluxes and the named test problems."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

GAMMA = 1.4

# flux codes shared with the residual kernels
LINEAR, BURGERS, EULER = 0, 1, 2
# Euler viscosity rules for the Rusanov flux
MATERIAL, ACOUSTIC = 0, 1

PERIODIC, TRANSMISSIVE = "periodic", "transmissive"
BOUNDARY_KINDS = (PERIODIC, TRANSMISSIVE)


class InvalidStateError(ValueError):
    """Non-physical gas state (non-positive density or pressure)."""


# ---------------------------------------------------------------------------
# physical fluxes


def flux_linear(u, a):
    """``a u`` for a scalar speed, or ``A u`` for a constant matrix acting on the last axis."""
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    if a.ndim == 0:
        return a * u
    return u @ a.T


def flux_burgers(u):
    # written as (u/2)^2, so the characteristic speed is u/2
    u = np.asarray(u, dtype=float)
    return 0.25 * u * u


def pressure(q, gamma: float = GAMMA):
    q = np.asarray(q, dtype=float)
    rho, mom, E = q[..., 0], q[..., 1], q[..., 2]
    return (gamma - 1.0) * (E - 0.5 * mom * mom / rho)


def flux_euler(q, gamma: float = GAMMA, check: bool = True):
    """Euler flux ``(rho v, rho v^2 + p, v (E + p))`` of conserved states ``q[..., 3]``."""
    q = np.asarray(q, dtype=float)
    rho, mom, E = q[..., 0], q[..., 1], q[..., 2]
    if check and np.any(rho <= 0.0):
        raise InvalidStateError("non-positive density")
    v = mom / rho
    p = (gamma - 1.0) * (E - 0.5 * mom * v)
    if check and np.any(p <= 0.0):
        raise InvalidStateError("non-positive pressure")
    return np.stack([mom, mom * v + p, v * (E + p)], axis=-1)


@dataclass(frozen=True)
class EulerState:
    """Primitive gas state; the conserved vector is ``(rho, rho v, E)``."""

    rho: float
    v: float
    p: float
    gamma: float = GAMMA

    def __post_init__(self):
        if not (self.rho > 0.0 and self.p > 0.0):
            raise InvalidStateError(f"invalid state rho={self.rho}, p={self.p}")

    @property
    def E(self) -> float:
        return self.p / (self.gamma - 1.0) + 0.5 * self.rho * self.v ** 2

    @property
    def c(self) -> float:
        return float(np.sqrt(self.gamma * self.p / self.rho))

    def conserved(self) -> np.ndarray:
        return np.array([self.rho, self.rho * self.v, self.E])

    @classmethod
    def from_conserved(cls, q, gamma: float = GAMMA) -> "EulerState":
        rho, mom, E = (float(x) for x in q)
        if rho <= 0.0:
            raise InvalidStateError("non-positive density")
        v = mom / rho
        return cls(rho, v, (gamma - 1.0) * (E - 0.5 * rho * v * v), gamma)


def primitive_to_conserved(rho, v, p, gamma: float = GAMMA) -> np.ndarray:
    rho, v, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, v, p)))
    return np.stack([rho, rho * v, p / (gamma - 1.0) + 0.5 * rho * v * v], axis=-1)


def conserved_to_primitive(q, gamma: float = GAMMA):
    q = np.asarray(q, dtype=float)
    rho = q[..., 0]
    v = q[..., 1] / rho
    p = (gamma - 1.0) * (q[..., 2] - 0.5 * rho * v * v)
    return rho, v, p


# ---------------------------------------------------------------------------
# flux models: physical flux + wave-speed bound + viscosity rule


@dataclass(frozen=True)
class LinearFlux:
    """``f(u) = A u``; a scalar speed is stored as a 1x1 matrix.

    The Rusanov viscosity is ``beta * rho(A)``; for a scalar speed this is the
    flux ``a (b+ u- + b- u+)`` of the upwind family, ``beta = 1`` being upwind.
    """

    matrix: np.ndarray
    beta: float = 1.0
    code: int = field(default=LINEAR, init=False)

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError("flux matrix must be square")
        object.__setattr__(self, "matrix", a)

    @classmethod
    def scalar(cls, a: float, beta: float = 1.0) -> "LinearFlux":
        return cls(np.array([[float(a)]]), beta)

    @property
    def ncomp(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix))))

    def flux(self, u):
        return np.asarray(u, dtype=float) @ self.matrix.T

    def spectral_radius(self, u):
        return np.full(np.shape(u)[:-1], self.radius)

    def alpha(self, um, up):
        return np.full(np.shape(um)[:-1], self.beta * self.radius)

    @cached_property
    def _params(self) -> np.ndarray:
        return np.concatenate([[self.beta * self.radius], self.matrix.ravel()])

    def kernel_params(self) -> np.ndarray:
        return self._params


_NO_PARAMS = np.zeros(1)


@dataclass(frozen=True)
class BurgersFlux:
    code: int = field(default=BURGERS, init=False)
    ncomp: int = field(default=1, init=False)

    def flux(self, u):
        return flux_burgers(u)

    def spectral_radius(self, u):
        return 0.5 * np.abs(np.asarray(u, dtype=float)[..., 0])

    def alpha(self, um, up):
        return np.maximum(self.spectral_radius(um), self.spectral_radius(up))

    def kernel_params(self) -> np.ndarray:
        return _NO_PARAMS


@dataclass(frozen=True)
class EulerFlux:
    """Euler flux with the Rusanov viscosity ``max|v|`` (material) or ``max(|v| + c)``."""

    gamma: float = GAMMA
    viscosity: str = "material"
    code: int = field(default=EULER, init=False)
    ncomp: int = field(default=3, init=False)

    def __post_init__(self):
        if self.viscosity not in ("material", "acoustic"):
            raise ValueError(f"unknown viscosity rule {self.viscosity!r}")

    def flux(self, u):
        return flux_euler(u, self.gamma, check=False)

    def spectral_radius(self, u):
        rho, v, p = conserved_to_primitive(u, self.gamma)
        c = np.sqrt(self.gamma * np.maximum(p, 0.0) / rho)
        return np.abs(v) + c

    def alpha(self, um, up):
        if self.viscosity == "material":
            return np.maximum(np.abs(um[..., 1] / um[..., 0]), np.abs(up[..., 1] / up[..., 0]))
        return np.maximum(self.spectral_radius(um), self.spectral_radius(up))

    @cached_property
    def _params(self) -> np.ndarray:
        return np.array([self.gamma, MATERIAL if self.viscosity == "material" else ACOUSTIC],
                        dtype=float)

    def kernel_params(self) -> np.ndarray:
        return self._params


# ---------------------------------------------------------------------------
# numerical fluxes


def rusanov_flux(um, up, alpha, flux: Callable):
    """Local Lax-Friedrichs flux ``(f(u-) + f(u+))/2 - alpha/2 (u+ - u-)``."""
    um = np.asarray(um, dtype=float)
    up = np.asarray(up, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0.0):
        raise ValueError("viscosity must be non-negative")
    if um.ndim and alpha.ndim == um.ndim - 1:
        alpha = alpha[..., None]
    return 0.5 * (flux(um) + flux(up)) - 0.5 * alpha * (up - um)


def upwind_flux_parameterized(um, up, a: float, beta: float):
    """``a (b+ u- + b- u+)`` with ``b+- = (a +- beta |a|) / (2 a)``; beta = 1 is upwind."""
    if a == 0:
        raise ValueError("advection speed must be nonzero")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    bp = (a + beta * abs(a)) / (2 * a)
    bm = (a - beta * abs(a)) / (2 * a)
    return a * (bp * np.asarray(um, dtype=float) + bm * np.asarray(up, dtype=float))


# ---------------------------------------------------------------------------
# problem definitions


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    model: object
    initial: Callable
    domain: tuple
    boundary: str = PERIODIC
    exact: Optional[Callable] = None
    t_final: float = 1.0

    def __post_init__(self):
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind {self.boundary!r}")

    @property
    def ncomp(self) -> int:
        return self.model.ncomp


def max_wave_speed(model, values) -> float:
    """Largest spectral radius of ``f'(u)`` over an array of states ``(..., m)``."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None] if model.ncomp == 1 else values[None, :]
    return float(np.max(model.spectral_radius(values)))


def _periodic_shift(x, t, speed, xmin, xmax):
    L = xmax - xmin
    return xmin + np.mod(np.asarray(x, dtype=float) - speed * t - xmin, L)


def _sin_warp(x):
    return np.sin(np.pi * x - np.sin(np.pi * x) / np.pi)


def _double_step(x, height=1.0):
    x = np.asarray(x, dtype=float)
    return np.where((x >= -0.25) & (x <= 0.25), height, 0.0)


def _sin_jump(x):
    x = np.asarray(x, dtype=float)
    return np.sin(np.pi * x) + np.where((x >= -0.4) & (x <= 0.4), 3.0, 0.0)


def _sin_hf(x):
    return -np.sin(10 * np.pi * np.asarray(x, dtype=float))


def _smooth_hf(x):
    x = np.asarray(x, dtype=float)
    return np.sin(np.pi * x) + np.sin(10 * np.pi * x) * np.exp(-20 * x * x)


def _burgers_smooth(x):
    return 0.5 - 0.25 * np.sin(np.pi * np.asarray(x, dtype=float))


_ADVECTION_ICS = {
    "advect-sin-warp": _sin_warp,
    "double-step": _double_step,
    "double-step-half": lambda x: _double_step(x, 0.5),
    "advect-sin-jump": _sin_jump,
    "advect-sin-hf": _sin_hf,
    "advect-smooth-hf": _smooth_hf,
}

EULER_RIEMANN_DATA = {
    "euler-expansion-a": ((1.0, -0.15, 1.0), (0.5, 0.15, 1.0)),
    "euler-colliding-b": ((1.5, 0.5, 10.0), (0.5, -0.5, 10.0)),
}
# long-tube domains holding every wave up to t = 1
EULER_RIEMANN_DOMAIN = {
    "euler-expansion-a": (-2.0, 2.0),
    "euler-colliding-b": (-6.0, 6.0),
}

PROBLEM_IDS = tuple(_ADVECTION_ICS) + ("burgers-smooth", "euler-density-wave") + tuple(
    EULER_RIEMANN_DATA) + ("linear-system-step",)


def _advection_problem(name, a=1.0, beta=1.0, equation="advection"):
    u0 = _ADVECTION_ICS[name]
    if equation == "burgers":
        from .exact import exact_burgers

        if name not in ("double-step",):
            raise ValueError(f"no Burgers setup for initial condition {name!r}")
        return ProblemSpec(
            f"burgers-{name}", BurgersFlux(), u0, (-1.0, 1.0), PERIODIC,
            exact=lambda x, t: exact_burgers(name, x, t), t_final=0.5,
        )
    model = LinearFlux.scalar(a, beta)
    return ProblemSpec(
        name, model, u0, (-1.0, 1.0), PERIODIC,
        exact=lambda x, t: u0(_periodic_shift(x, t, a, -1.0, 1.0)), t_final=2.0,
    )


def make_problem(name: str, *, equation: Optional[str] = None, a: float = 1.0,
                 beta: float = 1.0, kappa: int = 0, viscosity: Optional[str] = None,
                 domain: Optional[tuple] = None, boundary: Optional[str] = None,
                 matrix=None) -> ProblemSpec:
    """Build a named problem; keyword arguments override its defaults."""
    if name in _ADVECTION_ICS:
        spec = _advection_problem(name, a, beta, equation or "advection")
    elif name == "burgers-smooth":
        from .exact import exact_burgers

        spec = ProblemSpec(
            name, BurgersFlux(), _burgers_smooth, (0.0, 2.0), PERIODIC,
            exact=lambda x, t: exact_burgers(name, x, t), t_final=2.0,
        )
    elif name == "euler-density-wave":
        model = EulerFlux(viscosity=viscosity or "material")
        pr = 10.0 ** kappa

        def wave(x, t=0.0):
            x = np.asarray(x, dtype=float)
            return primitive_to_conserved(1.0 + 0.5 * np.sin(2 * np.pi * (x - t)), 1.0, pr)

        spec = ProblemSpec(name, model, wave, (0.0, 1.0), PERIODIC,
                           exact=lambda x, t: wave(x, t), t_final=0.25)
    elif name in EULER_RIEMANN_DATA:
        from .exact import exact_riemann_euler

        left, right = (EulerState(*s) for s in EULER_RIEMANN_DATA[name])
        model = EulerFlux(viscosity=viscosity or "material")
        sol = exact_riemann_euler(left, right)
        ql, qr = left.conserved(), right.conserved()

        def u0(x):
            x = np.asarray(x, dtype=float)
            return np.where((x < 0.0)[..., None], ql, qr)

        spec = ProblemSpec(name, model, u0, EULER_RIEMANN_DOMAIN[name], TRANSMISSIVE,
                           exact=sol.conserved_at, t_final=1.0)
    elif name == "linear-system-step":
        # configurable constant-matrix system with one fast and one slow wave
        mat = np.diag([-16.0, 1.0]) if matrix is None else np.asarray(matrix, dtype=float)
        model = LinearFlux(mat, beta)
        m = model.ncomp

        def u0(x):
            return np.repeat(_double_step(x)[..., None], m, axis=-1)

        spec = ProblemSpec(name, model, u0, (-1.0, 1.0), PERIODIC, exact=None, t_final=0.5)
    else:
        raise ValueError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_IDS)}")

    changes = {}
    if domain is not None:
        changes["domain"] = tuple(float(d) for d in domain)
    if boundary is not None:
        changes["boundary"] = boundary
    if changes:
        from dataclasses import replace

        spec = replace(spec, **changes)
    return spec
