"""Exact reference solutions: the Euler Riemann problem and two Burgers problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .problems import EulerState, primitive_to_conserved


class VacuumError(ValueError):
    """The Riemann data generate a vacuum region."""


class RiemannNonConvergence(RuntimeError):
    pass


def _pressure_branch(p, s: EulerState):
    """Pressure function f_K(p) and its derivative for one side of the fan."""
    g = s.gamma
    if p > s.p:
        A = 2.0 / ((g + 1.0) * s.rho)
        B = (g - 1.0) / (g + 1.0) * s.p
        root = np.sqrt(A / (p + B))
        f = (p - s.p) * root
        df = root * (1.0 - 0.5 * (p - s.p) / (p + B))
    else:
        c = s.c
        ratio = p / s.p
        f = 2.0 * c / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = ratio ** (-(g + 1.0) / (2.0 * g)) / (s.rho * c)
    return f, df


@dataclass(frozen=True)
class Wave:
    kind: str  # "shock" or "rarefaction"
    head: float
    tail: float  # equal to head for a shock


@dataclass(frozen=True)
class RiemannSolution:
    left: EulerState
    right: EulerState
    p_star: float
    v_star: float
    rho_star_left: float
    rho_star_right: float
    left_wave: Wave
    right_wave: Wave
    iterations: int

    @property
    def contact_speed(self) -> float:
        return self.v_star

    def sample(self, xi):
        """Primitive ``(rho, v, p)`` at the similarity coordinates ``xi = x / t``."""
        xi = np.asarray(xi, dtype=float)
        L, R, g = self.left, self.right, self.left.gamma
        rho = np.empty_like(xi)
        v = np.empty_like(xi)
        p = np.empty_like(xi)

        left_side = xi <= self.v_star
        # left of the contact
        lw = self.left_wave
        outer = left_side & (xi <= lw.head)
        inner = left_side & (xi >= lw.tail)
        rho[outer], v[outer], p[outer] = L.rho, L.v, L.p
        rho[inner], v[inner], p[inner] = self.rho_star_left, self.v_star, self.p_star
        if lw.kind == "rarefaction":
            fan = left_side & ~outer & ~inner
            c = 2.0 / (g + 1.0) * (L.c + 0.5 * (g - 1.0) * (L.v - xi[fan]))
            v[fan] = 2.0 / (g + 1.0) * (L.c + 0.5 * (g - 1.0) * L.v + xi[fan])
            rho[fan] = L.rho * (c / L.c) ** (2.0 / (g - 1.0))
            p[fan] = L.p * (c / L.c) ** (2.0 * g / (g - 1.0))

        right_side = ~left_side
        rw = self.right_wave
        outer = right_side & (xi >= rw.head)
        inner = right_side & (xi <= rw.tail)
        rho[outer], v[outer], p[outer] = R.rho, R.v, R.p
        rho[inner], v[inner], p[inner] = self.rho_star_right, self.v_star, self.p_star
        if rw.kind == "rarefaction":
            fan = right_side & ~outer & ~inner
            c = 2.0 / (g + 1.0) * (R.c - 0.5 * (g - 1.0) * (R.v - xi[fan]))
            v[fan] = 2.0 / (g + 1.0) * (-R.c + 0.5 * (g - 1.0) * R.v + xi[fan])
            rho[fan] = R.rho * (c / R.c) ** (2.0 / (g - 1.0))
            p[fan] = R.p * (c / R.c) ** (2.0 * g / (g - 1.0))
        return rho, v, p

    def primitive_at(self, x, t, x0: float = 0.0):
        x = np.asarray(x, dtype=float)
        if t <= 0.0:
            xi = np.where(x < x0, -np.inf, np.inf)
        else:
            xi = (x - x0) / t
        return self.sample(xi)

    def conserved_at(self, x, t, x0: float = 0.0):
        return primitive_to_conserved(*self.primitive_at(x, t, x0), self.left.gamma)

    def max_characteristic_speed(self, samples: int = 4001) -> float:
        """max(|v| + c) over the whole self-similar solution."""
        lo = min(self.left_wave.head, self.left.v - self.left.c) - 1.0
        hi = max(self.right_wave.head, self.right.v + self.right.c) + 1.0
        xi = np.concatenate([np.linspace(lo, hi, samples),
                             [self.left_wave.head, self.left_wave.tail,
                              self.right_wave.head, self.right_wave.tail]])
        rho, v, p = self.sample(xi)
        return float(np.max(np.abs(v) + np.sqrt(self.left.gamma * p / rho)))


def exact_riemann_euler(left: EulerState, right: EulerState, tol: float = 1e-12,
                        max_iter: int = 60) -> RiemannSolution:
    """Exact solution of the Euler Riemann problem (ideal gas, common gamma)."""
    g = left.gamma
    if right.gamma != g:
        raise ValueError("both states must share gamma")
    dv = right.v - left.v
    if 2.0 * (left.c + right.c) / (g - 1.0) <= dv:
        raise VacuumError("initial data generate vacuum")

    # two-rarefaction guess
    z = (g - 1.0) / (2.0 * g)
    num = left.c + right.c - 0.5 * (g - 1.0) * dv
    den = left.c / left.p ** z + right.c / right.p ** z
    p = max((num / den) ** (1.0 / z), 1e-14)

    for it in range(1, max_iter + 1):
        fl, dfl = _pressure_branch(p, left)
        fr, dfr = _pressure_branch(p, right)
        p_new = p - (fl + fr + dv) / (dfl + dfr)
        if p_new <= 0.0:
            p_new = 0.5 * p
        change = abs(p_new - p) / (0.5 * (p_new + p))
        p = p_new
        if change < tol:
            break
    else:
        raise RiemannNonConvergence(f"pressure iteration did not converge in {max_iter} steps")

    fl, _ = _pressure_branch(p, left)
    fr, _ = _pressure_branch(p, right)
    v = 0.5 * (left.v + right.v) + 0.5 * (fr - fl)
    gm = (g - 1.0) / (g + 1.0)

    if p > left.p:
        ratio = p / left.p
        rho_l = left.rho * (ratio + gm) / (gm * ratio + 1.0)
        s = left.v - left.c * np.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
        lwave = Wave("shock", float(s), float(s))
    else:
        rho_l = left.rho * (p / left.p) ** (1.0 / g)
        c_star = left.c * (p / left.p) ** z
        lwave = Wave("rarefaction", left.v - left.c, v - c_star)

    if p > right.p:
        ratio = p / right.p
        rho_r = right.rho * (ratio + gm) / (gm * ratio + 1.0)
        s = right.v + right.c * np.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
        rwave = Wave("shock", float(s), float(s))
    else:
        rho_r = right.rho * (p / right.p) ** (1.0 / g)
        c_star = right.c * (p / right.p) ** z
        rwave = Wave("rarefaction", right.v + right.c, v + c_star)

    return RiemannSolution(left, right, float(p), float(v), float(rho_l), float(rho_r),
                           lwave, rwave, it)


# ---------------------------------------------------------------------------
# Burgers, f(u) = u^2 / 4, characteristic speed u / 2

BURGERS_IC_IDS = ("burgers-smooth", "double-step")


def _burgers_u0(ic: str):
    if ic == "burgers-smooth":
        return lambda x: 0.5 - 0.25 * np.sin(np.pi * x)
    if ic == "double-step":
        return lambda x: np.where((x >= -0.25) & (x <= 0.25), 1.0, 0.0)
    raise ValueError(f"no exact Burgers solution for initial condition {ic!r}")


# first crossing of characteristics for 0.5 - 0.25 sin(pi x): 1 / max(-u0'/2)
BURGERS_SMOOTH_BREAK = 8.0 / np.pi


def _smooth_value(x: float, t: float) -> float:
    """Value at ``x`` (already reduced to the period) for the sine data."""
    u0 = _burgers_u0("burgers-smooth")
    if t <= BURGERS_SMOOTH_BREAK:
        # characteristic foot xi solves xi + t u0(xi)/2 = x; monotone in xi here
        lo, hi = x - t * 0.75 / 2 - 1e-12, x - t * 0.25 / 2 + 1e-12
        xi = brentq(lambda s: s + 0.5 * t * u0(s) - x, lo, hi, xtol=1e-15)
        return float(u0(xi))
    # the data are symmetric about x = 0 (where u0 = 0.5) in the frame moving at
    # speed 0.25, so the shock stays at x_s = 0.25 t; between consecutive shocks
    # the solution is smooth and the feet span one period (0, 2)
    xs = 0.25 * t
    y = xs + np.mod(x - xs, 2.0)
    if np.isclose(y, xs) or np.isclose(y, xs + 2.0):
        return 0.5
    g = lambda s: s + 0.5 * t * u0(s) - y
    xi = brentq(g, 0.0, 2.0, xtol=1e-15)
    return float(u0(xi))


def burgers_shock_position(ic: str, t: float):
    """Shock location(s) at time ``t`` (empty when none has formed)."""
    if ic == "burgers-smooth":
        return [0.25 * t] if t > BURGERS_SMOOTH_BREAK else []
    if ic == "double-step":
        if t > 2.0:
            raise ValueError("double-step solution is supported for t <= 2")
        return [0.25 + 0.25 * t]
    raise ValueError(f"no exact Burgers solution for initial condition {ic!r}")


def exact_burgers(ic: str, x, t: float):
    """Entropy solution for the sine data on [0, 2] or the double step on [-1, 1]."""
    u0 = _burgers_u0(ic)
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        return u0(x)
    if ic == "burgers-smooth":
        xr = np.mod(x, 2.0)
        return np.vectorize(lambda s: _smooth_value(s, t))(xr)
    if t > 2.0:
        raise ValueError("double-step solution is supported for t <= 2")
    # rarefaction from x = -0.25 (speeds 0 .. 1/2), shock from x = 0.25 at speed 1/4;
    # the fan head (speed 1/2) reaches the shock at t = 2
    rare = np.clip(2.0 * (x + 0.25) / t, 0.0, 1.0)
    shock = 0.25 + 0.25 * t
    return np.where((x >= -0.25) & (x <= shock), rare, 0.0)
