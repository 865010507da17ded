"""Strict JSON configuration documents.

A document has a ``system`` object discriminated by ``type`` and optional
``tolerances``, ``horizon``, ``window``, ``bump`` and ``strip`` entries.
Unknown keys, duplicate keys and non-finite numbers are rejected; errors
carry the line of the offending key.  Complex numbers are written as a plain
number or a ``[re, im]`` pair.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .exceptions import ConfigError, ResLabError
from .orbits import FixedPointDatum, PrimitiveOrbit
from .resonances import WindowSpec
from .systems import ExplicitOrbits, HorseshoeSuspension, MorseSmale, SystemSpec, ToralSuspension
from .trace import BumpSpec

SYSTEM_TYPES = ("toral_suspension", "linear_horseshoe", "morse_smale", "explicit_orbits")
TOP_LEVEL = {"system", "tolerances", "horizon", "window", "bump", "strip"}
TOLERANCE_KEYS = {"newton", "edge_clearance", "winding", "seed_diameter", "merge"}


@dataclass(frozen=True)
class Tolerances:
    newton: float = 1e-10
    edge_clearance: float = 1e-6
    winding: float = 1e-3
    seed_diameter: float = 0.1
    merge: float = 1e-9


@dataclass(frozen=True)
class StripSpec:
    beta: float | None = None
    A: float | None = None


@dataclass(frozen=True)
class Config:
    system: SystemSpec
    tolerances: Tolerances = field(default_factory=Tolerances)
    horizon: float | None = None
    window: WindowSpec | None = None
    bump: BumpSpec | None = None
    strip: StripSpec = field(default_factory=StripSpec)


class _Parser:
    def __init__(self, text: str):
        self.text = text

    def line_of(self, path: tuple) -> int | None:
        """Best-effort line of the last key in ``path`` (keys are searched in order)."""
        pos, found = 0, None
        for key in path:
            if isinstance(key, int):
                continue
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, pos)
            if m is None:
                break
            pos, found = m.end(), m.start()
        return None if found is None else self.text.count("\n", 0, found) + 1

    def fail(self, path: tuple, message: str):
        where = ".".join(str(p) for p in path) or "<root>"
        raise ConfigError(f"{where}: {message}", line=self.line_of(path))

    # --- typed accessors ---

    def obj(self, value, path, allowed, required=()):
        if not isinstance(value, dict):
            self.fail(path, "expected an object")
        for key in value:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key (allowed: {', '.join(sorted(allowed))})")
        for key in required:
            if key not in value:
                self.fail(path, f"missing required key '{key}'")
        return value

    def real(self, value, path):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, "expected a number")
        if not math.isfinite(value):
            self.fail(path, "number must be finite")
        return float(value)

    def integer(self, value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, "expected an integer")
        return value

    def boolean(self, value, path):
        if not isinstance(value, bool):
            self.fail(path, "expected true or false")
        return value

    def string(self, value, path):
        if not isinstance(value, str):
            self.fail(path, "expected a string")
        return value

    def complex_(self, value, path):
        if isinstance(value, list):
            if len(value) != 2:
                self.fail(path, "complex numbers are [re, im]")
            return complex(self.real(value[0], path), self.real(value[1], path))
        return complex(self.real(value, path))

    def array(self, value, path, item):
        if not isinstance(value, list):
            self.fail(path, "expected a list")
        return [item(v, path + (i,)) for i, v in enumerate(value)]

    def wrap(self, path, build):
        """Run a constructor and attach the key's line to its validation error."""
        try:
            return build()
        except ConfigError:
            raise
        except (ResLabError, ValueError) as exc:
            self.fail(path, str(exc))

    # --- sections ---

    def orbit(self, value, path) -> PrimitiveOrbit:
        allowed = {"id", "primitive_period", "backward_poincare_eigenvalues",
                   "forward_poincare_eigenvalues", "stable_count", "stable_orientable",
                   "weight_eigenvalues"}
        v = self.obj(value, path, allowed, ("id", "primitive_period", "stable_count"))
        has_back = "backward_poincare_eigenvalues" in v
        has_fwd = "forward_poincare_eigenvalues" in v
        if has_back == has_fwd:
            self.fail(path, "give exactly one of backward_poincare_eigenvalues, forward_poincare_eigenvalues")
        if has_back:
            eigs = self.array(v["backward_poincare_eigenvalues"], path + ("backward_poincare_eigenvalues",),
                              self.complex_)
        else:
            key = path + ("forward_poincare_eigenvalues",)
            fwd = self.array(v["forward_poincare_eigenvalues"], key, self.complex_)
            if any(e == 0 for e in fwd):
                self.fail(key, "forward eigenvalues must be nonzero")
            eigs = [1 / e for e in fwd]
        kwargs = dict(
            id=self.string(v["id"], path + ("id",)),
            primitive_period=self.real(v["primitive_period"], path + ("primitive_period",)),
            backward_poincare_eigenvalues=tuple(eigs),
            stable_count=self.integer(v["stable_count"], path + ("stable_count",)),
        )
        if "stable_orientable" in v:
            kwargs["stable_orientable"] = self.boolean(v["stable_orientable"], path + ("stable_orientable",))
        if "weight_eigenvalues" in v:
            kwargs["weight_eigenvalues"] = tuple(
                self.array(v["weight_eigenvalues"], path + ("weight_eigenvalues",), self.complex_))
        return self.wrap(path, lambda: PrimitiveOrbit(**kwargs))

    def fixed_point(self, value, path) -> FixedPointDatum:
        allowed = {"id", "generator_eigenvalues", "stable_count", "weight_generator_eigenvalues"}
        v = self.obj(value, path, allowed, ("id", "generator_eigenvalues", "stable_count"))
        kwargs = dict(
            id=self.string(v["id"], path + ("id",)),
            generator_eigenvalues=tuple(self.array(v["generator_eigenvalues"],
                                                   path + ("generator_eigenvalues",), self.complex_)),
            stable_count=self.integer(v["stable_count"], path + ("stable_count",)),
        )
        if "weight_generator_eigenvalues" in v:
            kwargs["weight_generator_eigenvalues"] = tuple(self.array(
                v["weight_generator_eigenvalues"], path + ("weight_generator_eigenvalues",), self.complex_))
        return self.wrap(path, lambda: FixedPointDatum(**kwargs))

    def system(self, value, path=("system",)) -> SystemSpec:
        if not isinstance(value, dict):
            self.fail(path, "expected an object")
        kind = value.get("type")
        if kind not in SYSTEM_TYPES:
            self.fail(path + ("type",), f"type must be one of {', '.join(SYSTEM_TYPES)}")
        if kind == "toral_suspension":
            v = self.obj(value, path, {"type", "matrix", "roof"}, ("matrix",))
            matrix = self.array(v["matrix"], path + ("matrix",),
                                lambda row, p: tuple(self.array(row, p, self.integer)))
            roof = self.real(v.get("roof", 1.0), path + ("roof",))
            return self.wrap(path, lambda: ToralSuspension(tuple(matrix), roof))
        if kind == "linear_horseshoe":
            v = self.obj(value, path, {"type", "expansion", "contraction", "symbol_count",
                                       "symbol_weights", "roof"}, ("expansion", "contraction"))
            k = self.integer(v.get("symbol_count", 2), path + ("symbol_count",))
            weights = (self.array(v["symbol_weights"], path + ("symbol_weights",), self.real)
                       if "symbol_weights" in v else [1.0] * k)
            args = dict(expansion=self.real(v["expansion"], path + ("expansion",)),
                        contraction=self.real(v["contraction"], path + ("contraction",)),
                        symbol_count=k, symbol_weights=tuple(weights),
                        roof=self.real(v.get("roof", 1.0), path + ("roof",)))
            return self.wrap(path, lambda: HorseshoeSuspension(**args))
        if kind == "morse_smale":
            v = self.obj(value, path, {"type", "closed_orbits", "fixed_points"})
            orbits = self.array(v.get("closed_orbits", []), path + ("closed_orbits",), self.orbit)
            fps = self.array(v.get("fixed_points", []), path + ("fixed_points",), self.fixed_point)
            return self.wrap(path, lambda: MorseSmale(tuple(orbits), tuple(fps)))
        v = self.obj(value, path, {"type", "orbits"}, ("orbits",))
        orbits = self.array(v["orbits"], path + ("orbits",), self.orbit)
        return self.wrap(path, lambda: ExplicitOrbits(tuple(orbits)))

    def window(self, value, path=("window",)) -> WindowSpec:
        if isinstance(value, list):
            if len(value) != 4:
                self.fail(path, "window list is [re_min, re_max, im_min, im_max]")
            vals = [self.real(x, path) for x in value]
        else:
            keys = ("re_min", "re_max", "im_min", "im_max")
            v = self.obj(value, path, set(keys), keys)
            vals = [self.real(v[k], path + (k,)) for k in keys]
        return self.wrap(path, lambda: WindowSpec(*vals))

    def document(self, doc) -> Config:
        root = self.obj(doc, (), TOP_LEVEL, ("system",))
        system = self.system(root["system"])
        tol = Tolerances()
        if "tolerances" in root:
            t = self.obj(root["tolerances"], ("tolerances",), TOLERANCE_KEYS)
            vals = {k: self.real(x, ("tolerances", k)) for k, x in t.items()}
            for k, x in vals.items():
                if x <= 0:
                    self.fail(("tolerances", k), "must be positive")
            tol = Tolerances(**vals)
        horizon = None
        if "horizon" in root:
            horizon = self.real(root["horizon"], ("horizon",))
            if horizon <= 0:
                self.fail(("horizon",), "must be positive")
        window = self.window(root["window"]) if "window" in root else None
        bump = None
        if "bump" in root:
            b = self.obj(root["bump"], ("bump",), {"l", "d", "quadrature_order"}, ("l", "d"))
            args = dict(l=self.real(b["l"], ("bump", "l")), d=self.real(b["d"], ("bump", "d")))
            if "quadrature_order" in b:
                args["quadrature_order"] = self.integer(b["quadrature_order"], ("bump", "quadrature_order"))
            bump = self.wrap(("bump",), lambda: BumpSpec(**args))
        strip = StripSpec()
        if "strip" in root:
            s = self.obj(root["strip"], ("strip",), {"beta", "A"})
            vals = {k: self.real(x, ("strip", k)) for k, x in s.items()}
            for k, x in vals.items():
                if x <= 0:
                    self.fail(("strip", k), "must be positive")
            strip = StripSpec(**vals)
        return Config(system, tol, horizon, window, bump, strip)


def _reject_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(f"duplicate key '{k}'")
        out[k] = v
    return out


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def parse_config(text: str) -> Config:
    """Parse and validate a configuration document.

    Raises
    ------
    ConfigError
        On JSON syntax errors or schema violations, with the line number.
    """
    parser = _Parser(text)
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    except ConfigError as exc:
        key = re.search(r"'(.*)'", str(exc))
        line = None
        if key:
            hits = [m.start() for m in re.finditer(r'"%s"\s*:' % re.escape(key.group(1)), text)]
            line = text.count("\n", 0, hits[1]) + 1 if len(hits) > 1 else None
        raise ConfigError(str(exc), line=line) from None
    return parser.document(doc)


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
