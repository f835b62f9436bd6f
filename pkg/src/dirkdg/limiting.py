"""BDF moment limiter, MP limiter and the frozen MP limiter with its trouble mask.

All limiters act componentwise on the conserved variables and never touch
the cell means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import PERIODIC

MASK_RULES = ("extrema", "bounds")
DEFAULT_TVB_M = 50.0
ISOLATION = 2


def minmod(*values):
    """Common-sign minimum magnitude of the arguments, else 0.

    Accepts scalars or broadcastable arrays; the result has the broadcast shape.
    """
    if len(values) == 1 and np.ndim(values[0]) == 1 and not np.isscalar(values[0]):
        values = tuple(values[0])
    if not values:
        raise ValueError("minmod needs at least one argument")
    arr = np.stack(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in values)))
    s = np.sign(arr[0])
    same = np.all(np.sign(arr) == s, axis=0) & (s != 0)
    out = np.where(same, s * np.min(np.abs(arr), axis=0), 0.0)
    return out if out.ndim else float(out)


def _neighbours(a: np.ndarray, boundary: str):
    """Values of cells j-1 and j+1 along axis 0; transmissive ghosts copy the boundary cell."""
    if boundary == PERIODIC:
        return np.roll(a, 1, axis=0), np.roll(a, -1, axis=0)
    lo = np.concatenate([a[:1], a[:-1]])
    hi = np.concatenate([a[1:], a[-1:]])
    return lo, hi


def bdf_limit(state, boundary: str = PERIODIC) -> np.ndarray:
    """Adaptive moment limiter: u^(l) <- m((2l-1)u^(l), D+u^(l-1), D-u^(l-1)) / (2l-1).

    The sweep starts at l = p and moves to l - 1 only in cells where the
    minmod did not return the cell's own scaled moment.
    Returns a new moments array.
    """
    u = np.array(state.moments if hasattr(state, "moments") else state, dtype=float)
    p = u.shape[1] - 1
    if p < 1:
        return u
    active = np.ones((u.shape[0], u.shape[2]), dtype=bool)
    for l in range(p, 0, -1):
        lower = u[:, l - 1, :]
        lo, hi = _neighbours(lower, boundary)
        own = (2 * l - 1) * u[:, l, :]
        limited = minmod(own, hi - lower, lower - lo)
        changed = limited != own
        u[:, l, :] = np.where(active, limited / (2 * l - 1), u[:, l, :])
        active &= changed
        if not active.any():
            break
    return u


def _ratio(num, den, rule: str):
    """num / den with the degenerate-ratio conventions of the MP indicator."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    regular = (den != 0.0) & (np.sign(den) == np.sign(num))
    with np.errstate(divide="ignore", invalid="ignore"):
        plain = num / den
    if rule == "bounds":
        degenerate = np.where(num == 0.0, 1.0, 0.0)
    else:
        # plain division: 0 / nonzero is 0, only 0 / 0 is left to convention
        degenerate = np.where((num == 0.0) & (den == 0.0), 1.0, np.where(den != 0.0, plain, 0.0))
    return np.where(regular, plain, degenerate)


def mp_phi(means, right_edge, left_edge, boundary: str = PERIODIC, rule: str = "extrema"):
    """MP factor phi_j = min(1, Du^max / D_max u, Du^min / D_min u), clipped to [0, 1].

    ``means`` and the edge values share a shape ``(N,)`` or ``(N, m)``.  With
    ``rule="extrema"`` a nonzero denominator divides literally (0 / x = 0) and a
    zero one gives 1 over a zero numerator, else 0; on the predictor's halfway
    reconstruction this flags exactly the strict local extrema.  ``rule="bounds"``
    also counts 0 over a nonzero denominator as 1, which never flags those.
    """
    if rule not in MASK_RULES:
        raise ValueError(f"unknown MP rule {rule!r}")
    u = np.asarray(means, dtype=float)
    lo, hi = _neighbours(u, boundary)
    up_bound = np.maximum(np.maximum(lo, u), hi) - u
    low_bound = np.minimum(np.minimum(lo, u), hi) - u
    emax = np.maximum(right_edge, left_edge) - u
    emin = np.minimum(right_edge, left_edge) - u
    phi = np.minimum(1.0, np.minimum(_ratio(up_bound, emax, rule), _ratio(low_bound, emin, rule)))
    return np.clip(phi, 0.0, 1.0)


def predictor_edges(means, boundary: str = PERIODIC):
    """Edge values of the predictor's linear reconstruction: halfway to each neighbour mean."""
    u = np.asarray(means, dtype=float)
    lo, hi = _neighbours(u, boundary)
    return u + 0.5 * (hi - u), u - 0.5 * (u - lo)


def _shifted_any(mask: np.ndarray, width: int, boundary: str) -> np.ndarray:
    """True where some other cell within ``width`` cells is True."""
    out = np.zeros_like(mask)
    for k in range(1, width + 1):
        if boundary == PERIODIC:
            out |= np.roll(mask, k, axis=0) | np.roll(mask, -k, axis=0)
        else:
            out[k:] |= mask[:-k]
            out[:-k] |= mask[k:]
    return out


def dilate(mask: np.ndarray, delta: int, boundary: str = PERIODIC) -> np.ndarray:
    """Mark the ``delta`` cells on each side of every 0-cell as 0 too."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    out = np.asarray(mask, dtype=float).copy()
    bad = out == 0.0
    spread = bad.copy()
    n = bad.shape[0]
    for k in range(1, min(delta, n) + 1):
        if boundary == PERIODIC:
            spread |= np.roll(bad, k, axis=0) | np.roll(bad, -k, axis=0)
        else:
            spread[k:] |= bad[:-k]
            spread[:-k] |= bad[k:]
    out[spread] = 0.0
    return out


@dataclass(frozen=True)
class TroubleMask:
    """Frozen limiter factors phi*_j in {0, 1}, shape ``(N, m)``, after dilation."""

    phi: np.ndarray
    raw: np.ndarray
    delta: int

    @property
    def troubled(self) -> np.ndarray:
        """Cells where any component is limited."""
        return np.any(self.phi == 0.0, axis=-1) if self.phi.ndim > 1 else self.phi == 0.0

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.troubled))


def frozen_mp_mask(means, boundary: str = PERIODIC, delta: int = 0, rule: str = "extrema",
                   tvb_m: float = 0.0, h: float = 0.0) -> TroubleMask:
    """Trouble mask from the predictor means: MP factor, threshold phi < 1 -> 0, dilation.

    With ``tvb_m > 0`` an isolated flagged cell (no other flag within
    ``ISOLATION`` cells) is dropped when its larger jump to a neighbour is below
    ``tvb_m * h**2`` times the component's range.  Resolved smooth extrema have
    jumps of order h^2 and sit far apart; oscillations come in clusters and
    stay flagged however small they are.
    """
    u = np.asarray(means, dtype=float)
    right, left = predictor_edges(u, boundary)
    raw = mp_phi(u, right, left, boundary, rule)
    flagged = raw < 1.0
    if tvb_m > 0.0:
        lo, hi = _neighbours(u, boundary)
        jump = np.maximum(np.abs(hi - u), np.abs(lo - u))
        floor = tvb_m * h * h * (np.max(u, axis=0) - np.min(u, axis=0))
        lone = ~_shifted_any(flagged, ISOLATION, boundary)
        flagged &= ~(lone & (jump <= floor))
    if flagged.ndim == 2:
        # a troubled cell is limited in every component
        flagged = np.repeat(flagged.any(axis=1, keepdims=True), flagged.shape[1], axis=1)
    phi = np.where(flagged, 0.0, 1.0)
    return TroubleMask(dilate(phi, delta, boundary), raw, delta)


def apply_frozen_limiter(state, mask) -> np.ndarray:
    """Scale moments l >= 1 of every cell by phi*_j."""
    u = np.array(state.moments if hasattr(state, "moments") else state, dtype=float)
    phi = mask.phi if isinstance(mask, TroubleMask) else np.asarray(mask, dtype=float)
    if phi.ndim == 1:
        phi = phi[:, None]
    u[:, 1:, :] *= phi[:, None, :]
    return u


def mp_limit(state, boundary: str = PERIODIC, rule: str = "extrema") -> np.ndarray:
    """Classical MP limiter on the DG solution's own linear part."""
    u = np.array(state.moments if hasattr(state, "moments") else state, dtype=float)
    means = u[:, 0, :]
    right = means + u[:, 1, :]
    left = means - u[:, 1, :]
    phi = mp_phi(means, right, left, boundary, rule)
    u[:, 1:, :] *= phi[:, None, :]
    return u


def total_variation(values, boundary: str = PERIODIC) -> float:
    v = np.asarray(values, dtype=float)
    d = np.diff(v, axis=0)
    tv = float(np.sum(np.abs(d)))
    if boundary == PERIODIC:
        tv += float(np.sum(np.abs(v[0] - v[-1])))
    return tv
