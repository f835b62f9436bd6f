"""Run configuration: validation and a flat INI round trip."""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .jfnk import SolverConfig
from .limiting import DEFAULT_TVB_M, MASK_RULES
from .problems import PROBLEM_IDS
from .tableaux import SCHEMES, scheme

SECTION = "run"
DT_MODES = ("ratio", "fixed")


class ConfigError(ValueError):
    """A configuration field holds an invalid value; ``field`` names it."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    problem: str = "advect-sin-warp"
    equation: Optional[str] = None
    scheme: str = "DG2DIRK22-Lstab"
    p: Optional[int] = None
    N: int = 40
    t_final: Optional[float] = None
    dt_mode: str = "ratio"
    r: float = 1.0
    dt_over_h: Optional[float] = None
    delta: Optional[int] = None
    limiters: bool = True
    mask_rule: str = "extrema"
    tvb_m: float = DEFAULT_TVB_M
    newton_tol: float = 1e-5
    newton_maxiter: int = 30
    krylov_tol: float = 1e-5
    krylov_maxiter: int = 100
    exact_affine: bool = False
    a: float = 1.0
    beta: float = 1.0
    kappa: int = 0
    viscosity: Optional[str] = None
    solution_path: Optional[str] = None
    report_path: Optional[str] = None
    exact_path: Optional[str] = None

    def __post_init__(self):
        self.validate()

    @property
    def degree(self) -> int:
        return SCHEMES[self.scheme][0] if self.p is None else self.p

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(self.newton_tol, self.newton_maxiter, self.krylov_tol,
                            self.krylov_maxiter)

    def validate(self) -> None:
        if self.problem not in PROBLEM_IDS:
            raise ConfigError("problem", f"unknown problem {self.problem!r}")
        if self.equation not in (None, "advection", "burgers"):
            raise ConfigError("equation", "must be 'advection' or 'burgers'")
        if self.scheme not in SCHEMES:
            raise ConfigError("scheme", f"unknown scheme {self.scheme!r}")
        if self.p is not None and self.p not in (0, 1, 2):
            raise ConfigError("p", "degree must be 0, 1 or 2")
        order = scheme(self.scheme)[1].order
        if order < self.degree + 1:
            raise ConfigError("p", f"{self.scheme} has order {order}, too low for p={self.degree}")
        if self.N < 4:
            raise ConfigError("N", "at least 4 cells are required")
        if self.t_final is not None and not self.t_final > 0:
            raise ConfigError("t_final", "must be positive")
        if self.dt_mode not in DT_MODES:
            raise ConfigError("dt_mode", f"must be one of {DT_MODES}")
        if self.dt_mode == "ratio" and not self.r > 0:
            raise ConfigError("r", "must be positive")
        if self.dt_mode == "fixed" and not (self.dt_over_h is not None and self.dt_over_h > 0):
            raise ConfigError("dt_over_h", "a positive value is required in fixed mode")
        if self.delta is not None and self.delta < 0:
            raise ConfigError("delta", "must be non-negative")
        if self.tvb_m < 0:
            raise ConfigError("tvb_m", "must be non-negative")
        if self.mask_rule not in MASK_RULES:
            raise ConfigError("mask_rule", f"must be one of {MASK_RULES}")
        try:
            SolverConfig(self.newton_tol, self.newton_maxiter, self.krylov_tol, self.krylov_maxiter)
        except ValueError as exc:
            name = str(exc).split()[0]
            raise ConfigError(name, str(exc)) from None
        if self.a == 0:
            raise ConfigError("a", "advection speed must be nonzero")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta", "must lie in [0, 1]")
        if self.viscosity not in (None, "material", "acoustic"):
            raise ConfigError("viscosity", "must be 'material' or 'acoustic'")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(name: str, text: str):
    kind = _TYPES[name]
    optional = kind.startswith("Optional")
    if optional and text in ("", "none", "None"):
        return None
    base = kind.removeprefix("Optional[").rstrip("]")
    try:
        if base == "bool":
            lowered = text.strip().lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return lowered in ("true", "1", "yes")
        if base == "int":
            return int(text)
        if base == "float":
            return float(text)
    except ValueError:
        raise ConfigError(name, f"cannot parse {text!r} as {base}") from None
    return text


def emit(config: RunConfig) -> str:
    """INI text of every field; ``None`` is written as ``none``."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser[SECTION] = {k: ("none" if v is None else repr(v) if isinstance(v, float) else str(v))
                       for k, v in asdict(config).items()}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse(text: str) -> RunConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(text)
    if SECTION not in parser:
        raise ConfigError(SECTION, "missing [run] section")
    values = {}
    for key, raw in parser[SECTION].items():
        if key not in _TYPES:
            raise ConfigError(key, "unknown field")
        values[key] = _convert(key, raw)
    return RunConfig(**values)


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(config: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit(config))
