"""Butcher tableaux of the DIRK and explicit schemes and their first-order predictors."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

GAMMA_LSTABLE_2 = 1.0 - np.sqrt(2.0) / 2.0
GAMMA_LSTABLE_3 = 0.435866521508459
DIRK33_ORDER3_GAMMAS = (0.158983899988677, 0.435866521508459, 2.405149578502864)


@dataclass(frozen=True)
class ButcherTableau:
    """Lower-triangular tableau ``(a, b, c)``.

    ``predictor_c`` are the stage abscissae the predictor marches through; they
    equal ``c`` except for the 3-stage family, whose published predictor uses
    ``1 + gamma/2`` as second abscissa.
    """

    name: str
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    predictor_c: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        s = a.shape[0]
        if a.shape != (s, s) or np.any(np.triu(a, 1) != 0.0):
            raise ValueError("a must be square lower-triangular")
        for arr in (self.b, self.c):
            if np.shape(arr) != (s,):
                raise ValueError("b and c must have one entry per stage")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        pc = self.c if self.predictor_c is None else np.asarray(self.predictor_c, dtype=float)
        object.__setattr__(self, "predictor_c", pc)

    @property
    def stages(self) -> int:
        return self.a.shape[0]

    @property
    def is_explicit(self) -> bool:
        return bool(np.all(np.diag(self.a) == 0.0))

    @property
    def is_dirk(self) -> bool:
        return bool(np.all(np.diag(self.a) > 0.0))

    @property
    def stiffly_accurate(self) -> bool:
        return bool(np.allclose(self.a[-1], self.b, atol=1e-15, rtol=0))

    def order_residuals(self) -> dict:
        """Residuals of the order conditions up to order 3."""
        a, b, c = self.a, self.b, self.c
        return {
            "sum_b": float(b.sum() - 1.0),
            "bc": float(b @ c - 0.5),
            "bc2": float(b @ c ** 2 - 1.0 / 3.0),
            "bac": float(b @ a @ c - 1.0 / 6.0),
        }


@dataclass(frozen=True)
class PredictorTableau:
    """Composite backward Euler: stage i advances by ``c_i - c_{i-1}`` from stage i-1."""

    c: np.ndarray
    increments: np.ndarray

    @property
    def a(self) -> np.ndarray:
        s = len(self.increments)
        return np.tril(np.tile(self.increments, (s, 1)))

    @property
    def b(self) -> np.ndarray:
        return self.increments.copy()


def make_dirk22(gamma: float) -> ButcherTableau:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    a = [[gamma, 0.0], [1.0 - 2.0 * gamma, gamma]]
    return ButcherTableau(f"DIRK22({gamma:g})", a, [0.5, 0.5], [gamma, 1.0 - gamma], 2)


def make_dirk33(gamma: float) -> ButcherTableau:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g = gamma
    b1 = -1.5 * g * g + 4.0 * g - 0.25
    b2 = 1.5 * g * g - 5.0 * g + 1.25
    a = [[g, 0.0, 0.0], [(1.0 - g) / 2.0, g, 0.0], [b1, b2, g]]
    c = [g, (1.0 + g) / 2.0, 1.0]
    tab = ButcherTableau(f"DIRK33({g:g})", a, [b1, b2, g], c, 1,
                         predictor_c=[g, 1.0 + g / 2.0, 1.0])
    # the published weights are consistent for every gamma but only reach
    # order 2 and 3 at isolated roots
    res = tab.order_residuals()
    if abs(res["bc"]) < 1e-12:
        third = max(abs(res["bc2"]), abs(res["bac"])) < 1e-12
        tab = replace(tab, order=3 if third else 2)
    return tab


def make_dirk43() -> ButcherTableau:
    F = Fraction
    a = [[F(1, 2), 0, 0, 0],
         [F(1, 6), F(1, 2), 0, 0],
         [F(-1, 2), F(1, 2), F(1, 2), 0],
         [F(3, 2), F(-3, 2), F(1, 2), F(1, 2)]]
    b = a[-1]
    c = [F(1, 2), F(2, 3), F(1, 2), F(1)]
    to_f = lambda rows: np.array(rows, dtype=float)
    return ButcherTableau("DIRK43", to_f(a), to_f(b), to_f(c), 3)


def make_explicit(order: int) -> ButcherTableau:
    if order == 2:
        return ButcherTableau("Heun", [[0.0, 0.0], [1.0, 0.0]], [0.5, 0.5], [0.0, 1.0], 2)
    if order == 3:
        a = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.25, 0.25, 0.0]]
        return ButcherTableau("SSPRK3", a, [1 / 6, 1 / 6, 2 / 3], [0.0, 1.0, 0.5], 3)
    raise ValueError(f"no explicit scheme of order {order}")


def derive_predictor(tableau: ButcherTableau, abscissae: str = "published") -> PredictorTableau:
    """Composite backward Euler predictor with increments ``(c_1, c_2 - c_1, ...)``.

    ``abscissae="published"`` marches through ``tableau.predictor_c``;
    ``"row-sums"`` uses the tableau's own ``c``.
    """
    if abscissae == "published":
        c = tableau.predictor_c
    elif abscissae == "row-sums":
        c = tableau.c
    else:
        raise ValueError(f"unknown abscissae choice {abscissae!r}")
    c = np.asarray(c, dtype=float)
    inc = np.diff(np.concatenate([[0.0], c]))
    return PredictorTableau(c.copy(), inc)


SCHEMES = {
    "DG2DIRK22-0.25": (1, lambda: make_dirk22(0.25)),
    "DG2DIRK22-Lstab": (1, lambda: make_dirk22(GAMMA_LSTABLE_2)),
    "DG2DIRK22-0.5": (1, lambda: make_dirk22(0.5)),
    "DG3DIRK33-Lstab": (2, lambda: make_dirk33(GAMMA_LSTABLE_3)),
    "DG3DIRK43": (2, make_dirk43),
    "RK2": (1, lambda: make_explicit(2)),
    "RK3": (2, lambda: make_explicit(3)),
}


def scheme(label: str) -> tuple[int, ButcherTableau]:
    """Polynomial degree and tableau of a scheme label."""
    try:
        p, make = SCHEMES[label]
    except KeyError:
        raise ValueError(f"unknown scheme {label!r}; known: {', '.join(SCHEMES)}") from None
    return p, make()
