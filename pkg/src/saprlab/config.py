"""Experiment configuration: an INI file with [network], [routing], [sim] and [output].

Every key has a default (the values used throughout the original study);
command-line flags override file values.

Example::

    [network]
    type = ba
    n = 1000
    seed = 1

    [routing]
    protocol = sapr
    alpha = 10

    [sim]
    R = 40
    seeds = 3
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import ParameterError
from .sim import SimConfig

PROTOCOLS = ("spr", "epr", "epr2", "sapr", "or")


@dataclass(frozen=True)
class NetworkConfig:
    type: str = "ba"
    n: int = 1000
    m0: int = 3
    m: int = 2
    path: str | None = None
    seed: int = 0
    lcc: bool = True

    def validate(self):
        if self.type not in ("ba", "edgelist"):
            raise ParameterError(f"unknown network type {self.type!r}")
        if self.type == "ba" and not self.n >= self.m0 >= self.m >= 1:
            raise ParameterError("need n >= m0 >= m >= 1")
        if self.type == "edgelist":
            if not self.path:
                raise ParameterError("edgelist network needs a path")
            if not Path(self.path).exists():
                raise FileNotFoundError(self.path)


@dataclass(frozen=True)
class RoutingConfig:
    protocol: str = "sapr"
    alpha: float = 1.0
    beta: float = 1.0
    k_c: float = 15.0
    eps: float = 0.3
    iterations: int = 50
    tol: float = 1e-3
    seed: int = 0
    or_iterations: int = 2000
    or_step: float = 1.0
    or_rule: str = "additive"
    mode: str = "source"

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise ParameterError(f"unknown protocol {self.protocol!r}")
        if self.alpha < 0:
            raise ParameterError("alpha must be non-negative")
        if self.iterations < 1 or self.or_iterations < 1:
            raise ParameterError("iteration counts must be >= 1")
        if not 0 <= self.eps <= 1 or self.k_c < 1:
            raise ParameterError("need k_c >= 1 and 0 <= eps <= 1")


@dataclass(frozen=True)
class SimSection:
    R: tuple[int, ...] = (1,)
    C: int = 1
    steps: int = 10_000
    warmup: int = 2_000
    window: int = 100
    seed: int = 0
    seeds: int = 1
    r_min: int = 1
    r_max: int = 200
    eta_c: float = 0.01

    def sim_config(self, R: int | None = None) -> SimConfig:
        return SimConfig(R=R if R is not None else self.R[0], C=self.C, steps=self.steps,
                         warmup=self.warmup, window=self.window, seed=self.seed)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    sim: SimSection = field(default_factory=SimSection)
    output: OutputConfig = field(default_factory=OutputConfig)

    def with_overrides(self, section: str, **values) -> ExperimentConfig:
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        cur = getattr(self, section)
        return replace(self, **{section: replace(cur, **_coerce_all(type(cur), values))})

    def as_dict(self):
        return asdict(self)


def parse_rates(text) -> tuple[int, ...]:
    """``"5"``, ``"1,2,8"`` or ``"10:50:5"`` (inclusive start:stop:step)."""
    if isinstance(text, int):
        return (text,)
    if isinstance(text, (tuple, list)):
        return tuple(int(x) for x in text)
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            start, stop = parts[0], parts[1]
            stride = parts[2] if len(parts) > 2 else 1
            rates = tuple(range(start, stop + 1, stride))
        else:
            rates = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ParameterError(f"cannot parse rate list {text!r}") from None
    if not rates or min(rates) < 1:
        raise ParameterError(f"rates must be positive integers: {text!r}")
    return rates


def _coerce(tp, raw):
    if raw is None or not isinstance(raw, str):
        if tp == "tuple[int, ...]":
            return parse_rates(raw)
        return raw
    if tp in ("int",):
        return int(raw)
    if tp in ("float",):
        return float(raw)
    if tp == "bool":
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if tp == "tuple[int, ...]":
        return parse_rates(raw)
    if tp == "str | None":
        return raw or None
    return raw


def _coerce_all(cls, values: dict) -> dict:
    types = {f.name: f.type for f in fields(cls)}
    unknown = set(values) - set(types)
    if unknown:
        raise ParameterError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return {k: _coerce(types[k], v) for k, v in values.items()}
    except ValueError as exc:
        raise ParameterError(str(exc)) from None


def load_config(path=None) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep 'R' and 'C' as written
    if not parser.read(path):
        raise FileNotFoundError(path)
    for section in parser.sections():
        if section not in ("network", "routing", "sim", "output"):
            raise ParameterError(f"unknown config section [{section}]")
        cfg = cfg.with_overrides(section, **dict(parser[section]))
    return cfg
