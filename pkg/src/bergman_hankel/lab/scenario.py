"""Flat key = value scenario files.

Lines are ``key = value``; ``#`` starts a comment. Unknown keys are errors so
typos do not silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from ..carleson import load_measure, point_masses, power_density, weighted_area
from ..errors import DomainError, PreconditionError
from ..symbols import parse_symbol
from ..weights import parse_weight

KINDS = ("classify-weight", "kernel-check", "carleson-test", "bda-profile", "decompose",
         "hankel-verify")


@dataclass
class Scenario:
    kind: str = "hankel-verify"
    name: str = "scenario"
    omega: str = "power:alpha=0"
    v: str = "power:alpha=0"
    eta: str = "power:alpha=0"
    p: float = 2.0
    q: float = 2.0
    symbol: str = "zbar"
    measure: str = "power_density:gamma=1"
    r: float = 1.0
    rho: float = 0.5
    r_max: float = 0.99
    seed: int = 0
    d: int = 10
    d_max: int = 1600
    tol: float = 1e-12
    grid_depth: int = 24
    n_angles: int = 8
    z_max: float = 0.95
    n_z: int = 20
    n_atoms: int = 40
    atom_max: float = 0.95
    n_random: int = 20
    n_lambda: int = 30
    n_samples: int = 64
    n_validate: int = 60
    proj_extra: int = 16
    validate_decomposition: bool = True
    base_dir: str = field(default=".", repr=False)

    # -- typed accessors ---------------------------------------------------------
    def weight(self, key):
        return parse_weight(getattr(self, key), self.base_dir)

    @property
    def f(self):
        return parse_symbol(self.symbol, self.base_dir)

    def mu(self):
        return parse_measure(self.measure, self.weight("omega"), self.base_dir)

    def echo(self):
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def validate(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}")
        for key in ("p", "q"):
            if not getattr(self, key) > 1:
                raise DomainError(f"{key} must exceed 1")
        if self.kind == "carleson-test" and self.p > self.q and self.p / (self.p - self.q) > 1e3:
            raise DomainError("p too close to q for the L^s criterion")
        if not 0 < self.r_max < 1:
            raise DomainError("r_max must lie in (0, 1)")
        if not 0 < self.r <= 2:
            raise DomainError("r must lie in (0, 2]")
        # parse everything once so bad grammar or missing files fail early
        for key in ("omega", "v", "eta"):
            self.weight(key)
        self.f
        if self.kind == "carleson-test":
            self.mu()
        return self


def _coerce(name, raw, typ):
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        return typ(raw.strip())
    except ValueError as exc:
        raise DomainError(f"bad value for {name}: {raw!r}") from exc


_BUILTIN = {"str": str, "float": float, "int": int, "bool": bool}
_TYPES = {f.name: _BUILTIN[f.type] for f in dataclasses.fields(Scenario)}


def apply_overrides(sc, pairs):
    for key, raw in pairs:
        key = key.strip().replace("-", "_")
        if key not in _TYPES or key == "base_dir":
            raise DomainError(f"unknown scenario key {key!r}")
        setattr(sc, key, _coerce(key, raw, _TYPES[key]))
    return sc


def parse_scenario(text, base_dir=".", overrides=()):
    pairs = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"line {n}: expected key = value")
        key, _, val = line.partition("=")
        pairs.append((key, val))
    sc = apply_overrides(Scenario(base_dir=base_dir), pairs)
    return apply_overrides(sc, overrides).validate()


def load_scenario(path, overrides=()):
    if not os.path.exists(path):
        raise PreconditionError(f"config {path} not found")
    with open(path) as fh:
        return parse_scenario(fh.read(), os.path.dirname(os.path.abspath(path)), overrides)


def parse_measure(text, omega, base_dir="."):
    """power_density:gamma=G | weighted_area | point:re=X,im=Y,mass=M | csv:path=FILE"""
    head, _, rest = text.strip().partition(":")
    args = dict(kv.split("=", 1) for kv in rest.split(",") if "=" in kv)
    if head == "power_density":
        return power_density(float(args.get("gamma", 1.0)))
    if head == "weighted_area":
        return weighted_area(omega)
    if head == "point":
        z = complex(float(args.get("re", 0)), float(args.get("im", 0)))
        return point_masses([z], [float(args.get("mass", 1.0))], f"point({z})")
    if head == "csv":
        path = args.get("path", "")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        if not os.path.exists(path):
            raise DomainError(f"measure file {path} not found")
        return load_measure(path)
    raise DomainError(f"unknown measure {text!r}")
