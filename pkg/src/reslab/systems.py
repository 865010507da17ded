"""Model systems and their periodic-orbit data.

Four families are supported:

* suspensions of hyperbolic toral automorphisms (constant roof),
* suspensions of a linear horseshoe with per-symbol weights,
* Morse-Smale assemblies of isolated closed orbits and hyperbolic fixed points,
* explicit lists of primitive orbits.

Every generator returns a :class:`PeriodicOrbitData`.  Besides the period
classes consumed by the trace formula, lattice systems also carry a *product
representation* (``lines``): rates ``rho`` and spacings ``T`` such that the
orbit sum ``sum_c w_c e^{i lam t_c} / t_c`` equals ``-sum log(1 - rho e^{i lam T})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .exceptions import NotHyperbolic, ValidationError
from .orbits import (
    HYPERBOLICITY_TOLERANCE,
    FixedPointDatum,
    PeriodClass,
    PrimitiveOrbit,
    aggregate_classes,
    det_factor,
    expansion_rates,
    geometric_term,
    power,
)

DEFAULT_HORIZON_MULTIPLE = 60
DEFAULT_LINE_DEPTH = 40
DEFAULT_LINE_FLOOR = -30.0


# --- system specifications ----------------------------------------------------

@dataclass(frozen=True)
class ToralSuspension:
    matrix: tuple[tuple[int, int], tuple[int, int]]
    roof: float = 1.0

    def __post_init__(self):
        m = tuple(tuple(row) for row in self.matrix)
        if len(m) != 2 or any(len(row) != 2 for row in m):
            raise ValidationError("toral matrix must be 2x2")
        if any(not isinstance(x, int) or isinstance(x, bool) for row in m for x in row):
            raise ValidationError("toral matrix entries must be integers")
        object.__setattr__(self, "matrix", m)
        _check_roof(self.roof)
        (a, b), (c, d) = m
        if abs(a * d - b * c) != 1:
            raise NotHyperbolic(f"toral matrix {m} has |det| != 1")
        if abs(a + d) <= 2:
            raise NotHyperbolic(f"toral matrix {m} has |trace| <= 2")

    ambient_dimension = 3


@dataclass(frozen=True)
class HorseshoeSuspension:
    expansion: float
    contraction: float
    symbol_count: int = 2
    symbol_weights: tuple[float, ...] = (1.0, 1.0)
    roof: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "symbol_weights", tuple(float(g) for g in self.symbol_weights))
        if self.symbol_count < 2:
            raise ValidationError("horseshoe needs at least two symbols")
        if len(self.symbol_weights) != self.symbol_count:
            raise ValidationError(
                f"expected {self.symbol_count} symbol weights, got {len(self.symbol_weights)}")
        if not self.expansion > 1 or math.log(self.expansion) < HYPERBOLICITY_TOLERANCE:
            raise NotHyperbolic("horseshoe expansion rate must exceed 1")
        if not 0 < self.contraction < 1 or -math.log(self.contraction) < HYPERBOLICITY_TOLERANCE:
            raise NotHyperbolic("horseshoe contraction rate must lie in (0, 1)")
        _check_roof(self.roof)

    ambient_dimension = 3

    @property
    def total_weight(self) -> float:
        return math.fsum(self.symbol_weights)


@dataclass(frozen=True)
class MorseSmale:
    closed_orbits: tuple[PrimitiveOrbit, ...] = ()
    fixed_points: tuple[FixedPointDatum, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "closed_orbits", tuple(self.closed_orbits))
        object.__setattr__(self, "fixed_points", tuple(self.fixed_points))

    @property
    def ambient_dimension(self) -> int:
        dims = [1 + o.transverse_dimension for o in self.closed_orbits]
        dims += [fp.dimension for fp in self.fixed_points]
        return max(dims, default=1)


@dataclass(frozen=True)
class ExplicitOrbits:
    orbits: tuple[PrimitiveOrbit, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "orbits", tuple(self.orbits))

    @property
    def ambient_dimension(self) -> int:
        return max((1 + o.transverse_dimension for o in self.orbits), default=1)


SystemSpec = ToralSuspension | HorseshoeSuspension | MorseSmale | ExplicitOrbits


def _check_roof(roof):
    if not (roof > 0 and math.isfinite(roof)):
        raise ValidationError("roof must be positive and finite")


# --- orbit data -------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeLine:
    """One factor ``(1 - rate * e^{i lam spacing})^multiplicity`` of the product form."""

    rate: complex
    spacing: float
    multiplicity: int = 1


@dataclass(frozen=True)
class LineRemainder:
    """Bound on the lines left out of a product representation, per spacing."""

    spacing: float
    mass: float
    max_rate: float


@dataclass(frozen=True)
class PeriodicOrbitData:
    period_classes: tuple[PeriodClass, ...]
    horizon: float
    primitive_orbits: tuple[PrimitiveOrbit, ...] | None = None
    primitive_period_counts: tuple[tuple[float, int], ...] | None = None
    lines: tuple[LatticeLine, ...] | None = None
    line_remainders: tuple[LineRemainder, ...] = ()
    fixed_points: tuple[FixedPointDatum, ...] = ()
    ambient_dimension: int = 3

    def __post_init__(self):
        object.__setattr__(self, "period_classes", tuple(self.period_classes))
        periods = [c.total_period for c in self.period_classes]
        if any(b <= a for a, b in zip(periods, periods[1:])):
            raise ValidationError("period classes must be strictly increasing in total_period")
        if periods and periods[-1] > self.horizon * (1 + 1e-12):
            raise ValidationError("a period class lies beyond the horizon")

    @property
    def has_product_form(self) -> bool:
        return self.lines is not None

    def lattice_floor(self) -> float:
        """Imaginary level above which the product representation is complete."""
        if self.lines is None:
            return math.inf
        floors = [math.log(r.max_rate) / r.spacing for r in self.line_remainders if r.max_rate > 0]
        return max(floors, default=-math.inf)

    def truncated(self, horizon: float) -> "PeriodicOrbitData":
        classes = tuple(c for c in self.period_classes if c.total_period <= horizon * (1 + 1e-12))
        counts = self.primitive_period_counts
        if counts is not None:
            counts = tuple((t, n) for t, n in counts if t <= horizon * (1 + 1e-12))
        orbits = self.primitive_orbits
        if orbits is not None:
            orbits = tuple(o for o in orbits if o.primitive_period <= horizon * (1 + 1e-12))
        return PeriodicOrbitData(classes, min(horizon, self.horizon), orbits, counts, self.lines,
                                 self.line_remainders, self.fixed_points, self.ambient_dimension)


# --- toral automorphisms ----------------------------------------------------------

def _matmul2(a, b):
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


def _matpow2(m, p):
    result = ((1, 0), (0, 1))
    while p:
        if p & 1:
            result = _matmul2(result, m)
        m = _matmul2(m, m)
        p >>= 1
    return result


def toral_fixed_point_count(matrix, p: int) -> int:
    """Number of fixed points of ``A^p`` on the torus, ``|det(A^p - I)|``.

    Exact integer arithmetic throughout.
    """
    spec = ToralSuspension(matrix)
    if p < 1:
        raise ValidationError("p must be >= 1")
    (a, b), (c, d) = _matpow2(spec.matrix, p)
    return abs((a - 1) * (d - 1) - b * c)


def mobius(n: int) -> int:
    result, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            result = -result
        k += 1
    return -result if n > 1 else result


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def primitive_counts_from_fixed_points(fixed_counts: Sequence[int]) -> list[int]:
    """Primitive period-``p`` orbit counts from fixed-point counts ``N_1..N_P`` (Moebius inversion)."""
    out = []
    for p in range(1, len(fixed_counts) + 1):
        total = sum(mobius(p // d) * fixed_counts[d - 1] for d in _divisors(p))
        if total % p:
            raise ValidationError(f"fixed-point counts are inconsistent at period {p}")
        out.append(total // p)
    return out


def toral_suspension_period_classes(spec: ToralSuspension, max_multiple: int) -> PeriodicOrbitData:
    """Period classes at ``t = pT`` for ``p = 1..max_multiple``.

    Each class sums ``T#`` over the closed orbits through the ``N_p`` fixed
    points of ``A^p``; every point contributes ``T`` and the determinant of
    every iterate is ``N_p``, so the class weight is ``T * N_p / N_p = T``.
    """
    if max_multiple < 1:
        raise ValidationError("max_multiple must be >= 1")
    T = float(spec.roof)
    counts = [toral_fixed_point_count(spec.matrix, p) for p in range(1, max_multiple + 1)]
    classes = tuple(PeriodClass(p * T, complex(T * n / n)) for p, n in enumerate(counts, start=1))
    prim = primitive_counts_from_fixed_points(counts)
    return PeriodicOrbitData(
        period_classes=classes,
        horizon=max_multiple * T,
        primitive_period_counts=tuple((p * T, n) for p, n in enumerate(prim, start=1) if n),
        lines=(LatticeLine(1.0 + 0j, T, 1),),
        line_remainders=(LineRemainder(T, 0.0, 0.0),),
        ambient_dimension=spec.ambient_dimension,
    )


# --- Lyndon words and the horseshoe ---------------------------------------------

def lyndon_words(symbol_count: int, max_length: int) -> list[tuple[int, ...]]:
    """All Lyndon words of length <= ``max_length`` over ``{0..k-1}``.

    Generated with Duval's algorithm and returned ordered by length, then
    lexicographically.
    """
    if symbol_count < 1 or max_length < 1:
        raise ValidationError("symbol_count and max_length must be >= 1")
    words = []
    w = [-1]
    while w:
        w[-1] += 1
        words.append(tuple(w))
        m = len(w)
        while len(w) < max_length:
            w.append(w[len(w) - m])
        while w and w[-1] == symbol_count - 1:
            w.pop()
    words.sort(key=lambda x: (len(x), x))
    return words


def lyndon_count(symbol_count: int, length: int) -> int:
    """Number of Lyndon words of the given length (necklace formula)."""
    return sum(mobius(d) * symbol_count ** (length // d) for d in _divisors(length)) // length


def horseshoe_word_orbit(spec: HorseshoeSuspension, word: Sequence[int]) -> PrimitiveOrbit:
    q = len(word)
    weight = math.prod(spec.symbol_weights[s] for s in word)
    return PrimitiveOrbit(
        id="".join(map(str, word)) if spec.symbol_count <= 10 else ".".join(map(str, word)),
        primitive_period=q * spec.roof,
        backward_poincare_eigenvalues=(spec.contraction ** -q, spec.expansion ** -q),
        stable_count=1,
        stable_orientable=True,
        weight_eigenvalues=(weight,),
    )


def horseshoe_class_weight(spec: HorseshoeSuspension, p: int) -> complex:
    """Closed form ``T G^p / |det(I - P^p)|`` with ``G`` the total symbol weight."""
    backward = (1.0 / spec.contraction, 1.0 / spec.expansion)
    return spec.roof * power(spec.total_weight, p) / det_factor(backward, p)


def horseshoe_lines(spec: HorseshoeSuspension, depth: int = DEFAULT_LINE_DEPTH):
    """Rates ``G nu^(l+1) mu^(-k)`` for ``0 <= k, l <= depth`` (equal rates merged)."""
    G, mu, nu, T = spec.total_weight, spec.expansion, spec.contraction, spec.roof
    merged: list[list] = []
    for k in range(depth + 1):
        for l in range(depth + 1):
            r = G * nu ** (l + 1) * mu ** (-k)
            for entry in merged:
                if abs(entry[0] - r) <= 1e-13 * abs(r):
                    entry[1] += 1
                    break
            else:
                merged.append([r, 1])
    merged.sort(key=lambda rm: -abs(rm[0]))
    lines = tuple(LatticeLine(complex(r), T, m) for r, m in merged)
    a = abs(G) * nu / (1 - nu) / (1 - 1 / mu)
    listed = abs(G) * nu * (1 - nu ** (depth + 1)) / (1 - nu) * (1 - mu ** -(depth + 1)) / (1 - 1 / mu)
    mass = max(a - listed, 0.0) + 4e-16 * a
    max_rate = abs(G) * max(nu ** (depth + 2), nu * mu ** -(depth + 1))
    return lines, LineRemainder(T, mass, max_rate)


def horseshoe_map_resonances(spec: HorseshoeSuspension, min_modulus: float) -> tuple[tuple[complex, int], ...]:
    """Every map resonance ``G nu^(l+1) mu^(-k)`` of modulus at least ``min_modulus``."""
    G, mu, nu = spec.total_weight, spec.expansion, spec.contraction
    if G == 0:
        return ()
    found: list[list] = []
    l = 0
    while abs(G) * nu ** (l + 1) >= min_modulus:
        k = 0
        while True:
            r = G * nu ** (l + 1) * mu ** (-k)
            if abs(r) < min_modulus:
                break
            for entry in found:
                if abs(entry[0] - r) <= 1e-13 * abs(r):
                    entry[1] += 1
                    break
            else:
                found.append([complex(r), 1])
            k += 1
        l += 1
    found.sort(key=lambda rm: -abs(rm[0]))
    return tuple((r, m) for r, m in found)


def horseshoe_orbits(spec: HorseshoeSuspension, max_word_length: int, *,
                     enumerate_up_to: int = 16,
                     line_depth: int = DEFAULT_LINE_DEPTH) -> PeriodicOrbitData:
    """Orbit data of the horseshoe suspension up to total period ``max_word_length * T``.

    Period classes use the closed-form aggregate of all words of length ``p``
    (the sum over words of the product of symbol weights is ``G^p``).  Primitive
    orbits are enumerated from Lyndon words only when ``max_word_length`` does not
    exceed ``enumerate_up_to``; primitive counts are always available.
    """
    if max_word_length < 1:
        raise ValidationError("max_word_length must be >= 1")
    T = spec.roof
    classes = tuple(PeriodClass(p * T, horseshoe_class_weight(spec, p))
                    for p in range(1, max_word_length + 1))
    orbits = None
    if max_word_length <= enumerate_up_to:
        orbits = tuple(horseshoe_word_orbit(spec, w)
                       for w in lyndon_words(spec.symbol_count, max_word_length))
    counts = tuple((q * T, lyndon_count(spec.symbol_count, q)) for q in range(1, max_word_length + 1))
    lines, remainder = horseshoe_lines(spec, line_depth)
    return PeriodicOrbitData(classes, max_word_length * T, orbits, counts, lines, (remainder,),
                             ambient_dimension=spec.ambient_dimension)


def classes_from_orbits(orbits: Sequence[PrimitiveOrbit], horizon: float) -> tuple[PeriodClass, ...]:
    terms = []
    for orbit in orbits:
        n = 1
        while n * orbit.primitive_period <= horizon * (1 + 1e-12):
            terms.append((n * orbit.primitive_period, geometric_term(orbit, n)))
            n += 1
    return tuple(aggregate_classes(terms))


# --- Morse-Smale and explicit orbit lists -----------------------------------------

def _orbit_lines(orbits: Sequence[PrimitiveOrbit], line_floor: float):
    lines, remainders = [], {}
    for orbit in orbits:
        T = orbit.primitive_period
        expansion = expansion_rates(orbit, math.exp(line_floor * T))
        lines.extend(LatticeLine(r, T, m) for r, m in expansion.rates)
        mass, mx = remainders.get(T, (0.0, 0.0))
        remainders[T] = (mass + expansion.omitted_mass, max(mx, expansion.omitted_max))
    rems = tuple(LineRemainder(T, m, x) for T, (m, x) in sorted(remainders.items()))
    return tuple(lines), rems


def _default_horizon(orbits) -> float:
    return DEFAULT_HORIZON_MULTIPLE * min((o.primitive_period for o in orbits), default=1.0)


def _primitive_counts(orbits):
    counts: dict[float, int] = {}
    for o in orbits:
        counts[o.primitive_period] = counts.get(o.primitive_period, 0) + 1
    return tuple(sorted(counts.items()))


def explicit_orbit_data(orbits: Sequence[PrimitiveOrbit], horizon: float | None = None, *,
                        line_floor: float = DEFAULT_LINE_FLOOR,
                        fixed_points: Sequence[FixedPointDatum] = (),
                        ambient_dimension: int | None = None) -> PeriodicOrbitData:
    orbits = tuple(sorted(orbits, key=lambda o: (o.primitive_period, o.id)))
    if horizon is None:
        horizon = _default_horizon(orbits)
    lines, rems = _orbit_lines(orbits, line_floor)
    if ambient_dimension is None:
        ambient_dimension = ExplicitOrbits(orbits).ambient_dimension
    return PeriodicOrbitData(
        period_classes=classes_from_orbits(orbits, horizon),
        horizon=horizon,
        primitive_orbits=orbits,
        primitive_period_counts=_primitive_counts(orbits),
        lines=lines,
        line_remainders=rems,
        fixed_points=tuple(fixed_points),
        ambient_dimension=ambient_dimension,
    )


def assemble_morse_smale(spec: MorseSmale, horizon: float | None = None, *,
                         line_floor: float = DEFAULT_LINE_FLOOR):
    """Disjoint union of the closed orbits; fixed points are carried alongside.

    Fixed points have no closed orbits and add no period class, but they do
    contribute resonances and a smooth term to the flat trace.

    Returns
    -------
    (PeriodicOrbitData, tuple of FixedPointDatum)
    """
    ids = [o.id for o in spec.closed_orbits] + [fp.id for fp in spec.fixed_points]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise ValidationError(f"duplicate component ids: {sorted(dupes)}")
    data = explicit_orbit_data(spec.closed_orbits, horizon, line_floor=line_floor,
                               fixed_points=spec.fixed_points,
                               ambient_dimension=spec.ambient_dimension)
    return data, spec.fixed_points


def orbit_data(spec: SystemSpec, horizon: float | None = None) -> PeriodicOrbitData:
    """Orbit data for any system; ``horizon`` defaults to 60 roof units (or 60 shortest periods)."""
    if isinstance(spec, ToralSuspension):
        multiple = DEFAULT_HORIZON_MULTIPLE if horizon is None else int(math.floor(horizon / spec.roof + 1e-9))
        return toral_suspension_period_classes(spec, max(multiple, 1))
    if isinstance(spec, HorseshoeSuspension):
        multiple = DEFAULT_HORIZON_MULTIPLE if horizon is None else int(math.floor(horizon / spec.roof + 1e-9))
        return horseshoe_orbits(spec, max(multiple, 1))
    if isinstance(spec, MorseSmale):
        return assemble_morse_smale(spec, horizon)[0]
    if isinstance(spec, ExplicitOrbits):
        return explicit_orbit_data(spec.orbits, horizon)
    raise ValidationError(f"unknown system type {type(spec).__name__}")
