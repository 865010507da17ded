"""Resonance sets: exact lattices and argument-principle localisation.

Resonances live in the ``lam``-plane with decaying modes in ``Im lam < 0``.
Exact lattices come from closed formulas (suspensions, isolated closed
orbits, hyperbolic fixed points).  Numerical localisation counts zeros of
``zeta1`` by the argument principle on nested rectangles and polishes them with
Newton's method.
"""
from __future__ import annotations

import cmath
import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .contour import QuadratureFailure, integrate_segment
from .exceptions import (
    ContourTooClose,
    IncompleteSource,
    LocalizationMismatch,
    NoConvergence,
    NonIntegerResidue,
    ValidationError,
    ZeroMapResonance,
)
from .orbits import FixedPointDatum, PrimitiveOrbit
from .systems import (
    ExplicitOrbits,
    HorseshoeSuspension,
    MorseSmale,
    PeriodicOrbitData,
    ToralSuspension,
    horseshoe_map_resonances,
)
from .zeta import ZetaFunction

log = logging.getLogger(__name__)

MERGE_TOLERANCE = 1e-9
EDGE_CLEARANCE = 1e-6
WINDING_TOLERANCE = 1e-3
INTEGER_GUARD = 0.1
TWO_PI = 2 * math.pi


class Provenance(str, Enum):
    EXACT_LATTICE = "ExactLattice"
    LOCATED = "Located"


@dataclass(frozen=True)
class Resonance:
    value: complex
    multiplicity: int = 1
    provenance: Provenance = Provenance.EXACT_LATTICE

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if self.multiplicity < 1:
            raise ValidationError("resonance multiplicity must be >= 1")
        object.__setattr__(self, "provenance", Provenance(self.provenance))


@dataclass(frozen=True)
class WindowSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("window bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValidationError(f"degenerate window {vals}")

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValidationError("window needs four comma-separated numbers re_min,re_max,im_min,im_max")
        return cls(*parts)

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def corners(self) -> tuple[complex, complex, complex, complex]:
        return (complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max))

    def split(self, fraction: float = 0.5) -> tuple["WindowSpec", "WindowSpec"]:
        """Cut across the longer side."""
        if self.width >= self.height:
            x = self.re_min + fraction * self.width
            return (WindowSpec(self.re_min, x, self.im_min, self.im_max),
                    WindowSpec(x, self.re_max, self.im_min, self.im_max))
        y = self.im_min + fraction * self.height
        return (WindowSpec(self.re_min, self.re_max, self.im_min, y),
                WindowSpec(self.re_min, self.re_max, y, self.im_max))

    def expanded(self, left=0.0, right=0.0, bottom=0.0, top=0.0) -> "WindowSpec":
        return WindowSpec(self.re_min - left, self.re_max + right, self.im_min - bottom, self.im_max + top)


@dataclass(frozen=True)
class MapResonanceSet:
    """Resonances ``e^{-i lam_k}`` of the base map, with multiplicities."""

    entries: tuple[tuple[complex, int], ...]

    def __post_init__(self):
        entries = tuple((complex(v), int(m)) for v, m in self.entries)
        if any(m < 1 for _, m in entries):
            raise ValidationError("map resonance multiplicity must be >= 1")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class ResonanceSet:
    """A finite resonance list, complete inside ``complete_window``."""

    resonances: tuple[Resonance, ...]
    complete_window: WindowSpec | None = None

    def __iter__(self):
        return iter(self.resonances)

    def __len__(self):
        return len(self.resonances)

    @property
    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.resonances)


def merge_resonances(items: Iterable[Resonance], tol: float = MERGE_TOLERANCE) -> list[Resonance]:
    """Merge points closer than ``tol``; multiplicities add.  Output sorted by (Re, Im)."""
    items = sorted(items, key=lambda r: (r.value.real, r.value.imag))
    merged: list[list] = []
    for r in items:
        match = None
        for entry in reversed(merged):
            if r.value.real - entry[0].real > tol:
                break
            if abs(entry[0] - r.value) <= tol:
                match = entry
                break
        if match is None:
            merged.append([r.value, r.multiplicity, r.provenance])
        else:
            match[1] += r.multiplicity
    out = [Resonance(v, m, p) for v, m, p in merged]
    out.sort(key=lambda r: (round(r.value.real, 9), round(r.value.imag, 9)))
    return out


# --- exact lattices ---------------------------------------------------------------

class LatticeStrip(NamedTuple):
    """Lattice content above an imaginary floor.

    ``lines`` holds ``(offset, step, multiplicity)`` for the infinite rows
    ``offset + step * n``; ``points`` holds isolated ``(value, multiplicity)``.
    """

    lines: list[tuple[complex, float, int]]
    points: list[tuple[complex, int]]


class ResonanceLattice:
    """Base class for exactly known resonance sets."""

    complete_above = -math.inf

    def strip(self, im_floor: float) -> LatticeStrip:
        raise NotImplementedError

    def in_window(self, window: WindowSpec) -> list[Resonance]:
        if window.im_min < self.complete_above:
            raise IncompleteSource(
                f"lattice is only complete above Im = {self.complete_above:.6g}")
        content = self.strip(window.im_min)
        out = []
        for offset, step, mult in content.lines:
            if not window.im_min <= offset.imag <= window.im_max:
                continue
            n_lo = math.ceil((window.re_min - offset.real) / step - 1e-12)
            n_hi = math.floor((window.re_max - offset.real) / step + 1e-12)
            for n in range(n_lo, n_hi + 1):
                z = complex(offset.real + n * step, offset.imag)
                if window.contains(z, pad=1e-12):
                    out.append(Resonance(z, mult))
        for value, mult in content.points:
            if window.contains(value, pad=1e-12):
                out.append(Resonance(value, mult))
        return merge_resonances(out)


def _normalise_line(offset: complex, step: float) -> complex:
    re = math.remainder(offset.real, step)
    return complex(re, offset.imag)


def _merge_lines(lines: Iterable[tuple[complex, float, int]]) -> list[tuple[complex, float, int]]:
    merged: list[list] = []
    for offset, step, mult in lines:
        offset = _normalise_line(offset, step)
        for entry in merged:
            if abs(entry[1] - step) <= 1e-12 * step:
                d = offset - entry[0]
                d = complex(math.remainder(d.real, step), d.imag)
                if abs(d) <= MERGE_TOLERANCE:
                    entry[2] += mult
                    break
        else:
            merged.append([offset, step, mult])
    return [tuple(e) for e in merged]


class SuspensionLattice(ResonanceLattice):
    """``(lam_k + 2 pi n) / T`` with ``e^{-i lam_k}`` running over map resonances.

    ``map_resonances`` is either a fixed :class:`MapResonanceSet` or a callable
    ``min_modulus -> MapResonanceSet`` returning every map resonance of at
    least that modulus.
    """

    def __init__(self, map_resonances, roof: float, complete_above: float = -math.inf):
        if roof <= 0:
            raise ValidationError("roof must be positive")
        self.roof = float(roof)
        self._source = map_resonances
        self.complete_above = complete_above
        if isinstance(map_resonances, MapResonanceSet):
            for v, _ in map_resonances.entries:
                if v == 0:
                    raise ZeroMapResonance("map resonance 0 has no logarithm")

    def map_resonances(self, im_floor: float) -> MapResonanceSet:
        if isinstance(self._source, MapResonanceSet):
            return self._source
        floor = max(im_floor, -700.0 / self.roof)
        return self._source(math.exp(floor * self.roof))

    def strip(self, im_floor: float) -> LatticeStrip:
        T = self.roof
        lines = []
        for m, mult in self.map_resonances(im_floor).entries:
            if m == 0:
                raise ZeroMapResonance("map resonance 0 has no logarithm")
            base = 1j * cmath.log(m)
            offset = base / T
            if offset.imag >= im_floor - 1e-12:
                lines.append((offset, TWO_PI / T, mult))
        return LatticeStrip(_merge_lines(lines), [])


class ClosedOrbitLattice(ResonanceLattice):
    """Resonances of a single closed orbit.

    ``(-i mu_l + sum_{j<=s} i k_j lam_j - sum_{j>s} i k_j lam_j + 2 pi n + pi eps) / T``
    with ``k_j >= 1`` on stable and ``k_j >= 0`` on unstable directions;
    ``e^{-lam_j}`` are the backward return-map eigenvalues and ``e^{-mu_l}`` the
    bundle-transport eigenvalues.
    """

    def __init__(self, orbit: PrimitiveOrbit):
        self.orbit = orbit

    def strip(self, im_floor: float) -> LatticeStrip:
        orbit = self.orbit
        T = orbit.primitive_period
        stable = [-cmath.log(e) for e in orbit.stable_eigenvalues()]
        unstable = [-cmath.log(e) for e in orbit.unstable_eigenvalues()]
        # each index increment lowers Im by |Re lam_j| (> 0)
        dirs = [(1j * lam, 1) for lam in stable] + [(-1j * lam, 0) for lam in unstable]
        floor = im_floor * T
        raw = []
        for a in orbit.weight_eigenvalues:
            if a == 0:
                continue
            base = -1j * (-cmath.log(a)) + math.pi * orbit.epsilon
            for z in _lattice_sums(base, dirs, floor):
                raw.append((z / T, TWO_PI / T, 1))
        return LatticeStrip(_merge_lines(raw), [])


class FixedPointLattice(ResonanceLattice):
    """``i(-mu_l + sum_{j<=s} k_j lam_j - sum_{j>s} k_j lam_j)``, ``k_j >= 1`` on the stable block."""

    def __init__(self, fixed_point: FixedPointDatum):
        self.fixed_point = fixed_point

    def strip(self, im_floor: float) -> LatticeStrip:
        fp = self.fixed_point
        dirs = [(1j * lam, 1) if lam.real < 0 else (-1j * lam, 0) for lam in fp.generator_eigenvalues]
        points: dict[complex, int] = {}
        for mu in fp.weight_generator_eigenvalues:
            for z in _lattice_sums(-1j * mu, dirs, im_floor):
                points[z] = points.get(z, 0) + 1
        merged = merge_resonances(Resonance(z, m) for z, m in points.items())
        return LatticeStrip([], [(r.value, r.multiplicity) for r in merged])


def _lattice_sums(base: complex, dirs: Sequence[tuple[complex, int]], floor: float) -> list[complex]:
    """All ``base + sum_j k_j d_j`` (``k_j >= start_j``) with imaginary part >= ``floor``.

    Every direction has negative imaginary part, so the enumeration is finite.
    """
    out = []

    def walk(j, z):
        if j == len(dirs):
            if z.imag >= floor - 1e-12:
                out.append(z)
            return
        d, start = dirs[j]
        if d.imag >= 0:
            raise ValidationError("lattice direction does not decrease Im; eigenvalue not hyperbolic")
        z = z + start * d
        while z.imag >= floor - 1e-12:
            walk(j + 1, z)
            z = z + d

    walk(0, complex(base))
    return out


class UnionLattice(ResonanceLattice):
    def __init__(self, parts: Sequence[ResonanceLattice]):
        self.parts = list(parts)
        self.complete_above = max((p.complete_above for p in self.parts), default=-math.inf)

    def strip(self, im_floor: float) -> LatticeStrip:
        lines, points = [], []
        for p in self.parts:
            s = p.strip(im_floor)
            lines.extend(s.lines)
            points.extend(s.points)
        return LatticeStrip(_merge_lines(lines), points)


def exact_suspension_lattice(map_res: MapResonanceSet, roof: float, window: WindowSpec) -> list[Resonance]:
    return SuspensionLattice(map_res, roof).in_window(window)


def exact_morse_smale_closed_orbit(orbit: PrimitiveOrbit, window: WindowSpec) -> list[Resonance]:
    return ClosedOrbitLattice(orbit).in_window(window)


def exact_fixed_point_lattice(fp: FixedPointDatum, window: WindowSpec) -> list[Resonance]:
    return FixedPointLattice(fp).in_window(window)


def morse_smale_union(system: MorseSmale, window: WindowSpec) -> list[Resonance]:
    """Union over closed orbits and fixed points; coinciding points add multiplicities."""
    return system_lattice(system).in_window(window)


def system_lattice(spec) -> ResonanceLattice:
    """The exact resonance lattice of any implemented system."""
    if isinstance(spec, ToralSuspension):
        return SuspensionLattice(MapResonanceSet(((1.0, 1),)), spec.roof)
    if isinstance(spec, HorseshoeSuspension):
        return SuspensionLattice(lambda m: MapResonanceSet(horseshoe_map_resonances(spec, m)), spec.roof)
    if isinstance(spec, MorseSmale):
        return UnionLattice([ClosedOrbitLattice(o) for o in spec.closed_orbits]
                            + [FixedPointLattice(fp) for fp in spec.fixed_points])
    if isinstance(spec, ExplicitOrbits):
        return UnionLattice([ClosedOrbitLattice(o) for o in spec.orbits])
    raise ValidationError(f"no exact lattice for {type(spec).__name__}")


# --- argument principle -------------------------------------------------------------

class ZeroCount(NamedTuple):
    count: int
    raw: complex
    window: WindowSpec


def _edge_too_close(zeta, a: complex, b: complex, clearance: float, samples: int = 65) -> bool:
    s = np.linspace(0.0, 1.0, samples)
    z = a + s * (b - a)
    with np.errstate(all="ignore"):
        L = np.asarray(zeta.log_derivative(z), dtype=complex)
    if not np.all(np.isfinite(L)):
        return True
    nz = np.abs(L) > 0
    # a Newton step from each sample predicts the nearest simple zero
    pred = z[nz] - 1.0 / L[nz]
    direction = (b - a) / abs(b - a)
    rel = (pred - a) / direction
    along = rel.real
    dist = np.where((along >= 0) & (along <= abs(b - a)), np.abs(rel.imag),
                    np.minimum(np.abs(pred - a), np.abs(pred - b)))
    near = np.abs(1.0 / L[nz]) < 4 * abs(b - a) / (samples - 1)
    return bool(np.any(near & (dist < clearance)))


def winding_number(zeta, window: WindowSpec, *, quad_tol: float = WINDING_TOLERANCE,
                   edge_clearance: float = EDGE_CLEARANCE) -> complex:
    """Raw ``(1/2 pi i) \\oint zeta'/zeta`` around the window (counter-clockwise)."""
    corners = window.corners()
    edges = list(zip(corners, corners[1:] + corners[:1]))
    for a, b in edges:
        if _edge_too_close(zeta, a, b, edge_clearance):
            raise ContourTooClose(f"zero within {edge_clearance:g} of edge {a} -> {b}")
    total = 0j
    per_edge = quad_tol * TWO_PI / 4
    for a, b in edges:
        try:
            with np.errstate(all="ignore"):
                val, _ = integrate_segment(zeta.log_derivative, a, b, epsabs=per_edge / abs(b - a))
        except QuadratureFailure as exc:
            raise ContourTooClose(f"edge {a} -> {b}: {exc}") from None
        total += val
    return total / (TWO_PI * 1j)


def _rounded(raw: complex) -> int:
    n = round(raw.real)
    if abs(raw - n) >= INTEGER_GUARD:
        raise NonIntegerResidue(f"winding number {raw:.6g} is not within {INTEGER_GUARD} of an integer")
    return int(n)


def count_zeros_detailed(zeta, window: WindowSpec, *, edge_clearance: float = EDGE_CLEARANCE,
                         quad_tol: float = WINDING_TOLERANCE, max_attempts: int = 3) -> ZeroCount:
    """Count zeros in ``window``; edges that pass too close to a zero are pushed outward.

    Each retry moves the window edges out by ``0.37`` times a local spacing
    estimate (an irrational-looking factor so the shifted edge does not land on
    the next lattice row).
    """
    spacing = min(getattr(zeta, "spacing_hint", 1.0), window.width, window.height)
    current = window
    for attempt in range(max_attempts + 1):
        try:
            raw = winding_number(zeta, current, quad_tol=quad_tol, edge_clearance=edge_clearance)
            return ZeroCount(_rounded(raw), raw, current)
        except ContourTooClose:
            if attempt == max_attempts:
                raise
            d = 0.37 * spacing * (attempt + 1) / 4
            current = current.expanded(d, d, d, d)
            log.info("contour too close to a zero; expanding window to %s", current)
    raise AssertionError("unreachable")


def count_zeros_argument_principle(zeta, window: WindowSpec, **kwargs) -> int:
    """Number of zeros of ``zeta`` inside ``window``, with multiplicity."""
    return count_zeros_detailed(zeta, window, **kwargs).count


def circle_count(zeta, center: complex, radius: float, nodes: int = 64) -> int:
    """Argument-principle count on a small circle (periodic trapezoid rule)."""
    theta = TWO_PI * np.arange(nodes) / nodes
    u = radius * np.exp(1j * theta)
    with np.errstate(all="ignore"):
        L = np.asarray(zeta.log_derivative(center + u), dtype=complex)
    if not np.all(np.isfinite(L)):
        raise ContourTooClose("zero on the refinement circle")
    return _rounded(complex(np.mean(L * u)))


# --- Newton refinement -------------------------------------------------------------

def refine_newton(zeta, seed: complex, tol: float = 1e-10, *, multiplicity: int | None = None,
                  max_radius: float | None = None, max_iter: int = 100) -> Resonance:
    """Polish a zero of ``zeta`` from ``seed``.

    Steps are ``-m / (d log zeta / d lam)``; ``m`` starts at ``multiplicity`` (or
    1) and is reset to the circle count after convergence, followed by a few
    polishing steps.  With ``max_radius`` set, leaving that disk around the seed
    counts as failure.

    Raises
    ------
    NoConvergence
    """
    z = complex(seed)
    m = multiplicity or 1

    def step_at(z, m):
        with np.errstate(all="ignore"):
            L = complex(zeta.log_derivative(z))
        if not cmath.isfinite(L) or L == 0:
            raise NoConvergence(f"log-derivative vanishes or is singular at {z}")
        return -m / L

    for _ in range(max_iter):
        step = step_at(z, m)
        if max_radius is not None and abs(step) > 0.5 * max_radius:
            step *= 0.5 * max_radius / abs(step)
        z += step
        if max_radius is not None and abs(z - seed) > max_radius:
            raise NoConvergence(f"Newton left the radius-{max_radius:g} disk around {seed}")
        if abs(step) < tol and abs(complex(zeta(z))) < tol:
            break
    else:
        raise NoConvergence(f"no convergence from {seed} after {max_iter} iterations")

    radius = max(10 * tol, 1e-9)
    m = max(circle_count(zeta, z, radius), 1)
    for _ in range(3):
        try:
            step = step_at(z, m)
        except NoConvergence:
            break  # landed exactly on the zero
        if abs(step) > radius:
            break
        z += step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return Resonance(z, m, Provenance.LOCATED)


# --- localisation pipeline ---------------------------------------------------------

_SPLIT_FRACTIONS = (0.5, 0.4142135623730951, 0.5857864376269049, 0.3090169943749474, 0.6909830056250525)


def _threads() -> int:
    try:
        n = int(os.environ.get("RESLAB_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


class _Localiser:
    def __init__(self, zeta, tol, seed_diameter, quad_tol, edge_clearance):
        self.zeta = zeta
        self.tol = tol
        self.seed_diameter = seed_diameter
        self.quad_tol = quad_tol
        self.edge_clearance = edge_clearance

    def count(self, box):
        raw = winding_number(self.zeta, box, quad_tol=self.quad_tol, edge_clearance=self.edge_clearance)
        return _rounded(raw)

    def split(self, box, count, min_diameter=0.0):
        for f in _SPLIT_FRACTIONS:
            children = box.split(f)
            try:
                counts = [self.count(c) for c in children]
            except (ContourTooClose, NonIntegerResidue):
                continue
            if sum(counts) == count:
                return list(zip(children, counts))
            log.debug("additivity failed for %s at fraction %g", box, f)
        raise LocalizationMismatch(f"could not split {box} consistently (count {count})")

    def boxes(self, box, count, max_side):
        """Leaf boxes holding zeros, each no larger than the seed diameter."""
        if count == 0:
            return []
        if box.diameter <= self.seed_diameter and max(box.width, box.height) <= max_side:
            return [(box, count)]
        out = []
        for child, c in self.split(box, count):
            out.extend(self.boxes(child, c, max_side))
        return out

    def resolve(self, box, count):
        """Refine one leaf; split further if the box holds several distinct zeros."""
        try:
            res = refine_newton(self.zeta, box.center, self.tol, multiplicity=count,
                                max_radius=2 * box.diameter)
        except NoConvergence:
            res = None
        if res is not None and res.multiplicity == count and box.contains(res.value, pad=box.diameter):
            return [res]
        if box.diameter < 1e-6:
            log.warning("zero cluster of total multiplicity %d unresolved near %s", count, box.center)
            value = res.value if res is not None else box.center
            return [Resonance(value, count, Provenance.LOCATED)]
        out = []
        for child, c in self.split(box, count):
            if c:
                small = WindowSpec(child.re_min, child.re_max, child.im_min, child.im_max)
                out.extend(self.resolve(small, c))
        return out


def locate_resonances(source, window: WindowSpec, *, tol: float = 1e-10, seed_diameter: float = 0.1,
                      quad_tol: float = WINDING_TOLERANCE, edge_clearance: float = EDGE_CLEARANCE,
                      max_box_side: float | None = None) -> list[Resonance]:
    """Find the zeros of ``zeta1`` inside ``window``.

    The window is cut into boxes of side at most ``pi / T`` (half the lattice
    spacing), boxes with a nonzero count are bisected down to
    ``seed_diameter``, each seed is refined by Newton and given the
    multiplicity of a small-circle count, and coinciding results are merged.
    The total multiplicity always equals the count of the full window.

    ``source`` is a :class:`PeriodicOrbitData` or a zeta object exposing
    ``__call__`` and ``log_derivative``.  Hyperbolic fixed points enter
    ``zeta1`` only through closed orbits, so their resonances are not found
    here; :func:`system_lattice` lists them.
    """
    if isinstance(source, PeriodicOrbitData):
        if source.has_product_form and window.im_min < source.lattice_floor():
            raise IncompleteSource(
                f"product representation is only complete above Im = {source.lattice_floor():.6g}")
        zeta = ZetaFunction(source)
    else:
        zeta = source
    full = count_zeros_detailed(zeta, window, quad_tol=quad_tol, edge_clearance=edge_clearance)
    if full.count == 0:
        return []
    loc = _Localiser(zeta, tol, seed_diameter, quad_tol, edge_clearance)
    side = max_box_side or 0.5 * getattr(zeta, "spacing_hint", TWO_PI)
    top = loc.split(full.window, full.count) if full.window.diameter > seed_diameter else [(full.window, full.count)]
    top = [(b, c) for b, c in top if c]
    with ThreadPoolExecutor(max_workers=min(_threads(), max(len(top), 1))) as pool:
        leaf_lists = list(pool.map(lambda bc: loc.boxes(bc[0], bc[1], side), top))
    leaves = [leaf for lst in leaf_lists for leaf in lst]
    with ThreadPoolExecutor(max_workers=min(_threads(), max(len(leaves), 1))) as pool:
        found = list(pool.map(lambda bc: loc.resolve(bc[0], bc[1]), leaves))
    results = merge_resonances([r for lst in found for r in lst])
    # coinciding results from neighbouring boxes are the same zero: trust a fresh circle count
    fixed = []
    for r in results:
        if r.multiplicity > 1:
            m = circle_count(zeta, r.value, max(10 * tol, 1e-9))
            r = Resonance(r.value, m, Provenance.LOCATED)
        fixed.append(r)
    total = sum(r.multiplicity for r in fixed)
    if total != full.count:
        raise LocalizationMismatch(
            f"located multiplicity {total} differs from window count {full.count}")
    if full.window != window:
        # the contour was pushed outward; keep only what the caller asked for
        fixed = [r for r in fixed if window.contains(r.value, pad=edge_clearance)]
    return fixed


# --- CSV ---------------------------------------------------------------------------

CSV_COLUMNS = ("re", "im", "multiplicity", "provenance")


def format_float(x: float) -> str:
    """Shortest string that round-trips to the same double."""
    x = float(x)
    if x == 0:
        x = 0.0  # drop the sign of negative zero
    return repr(x)


def resonances_to_csv(resonances: Iterable[Resonance]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in resonances:
        w.writerow([format_float(r.value.real), format_float(r.value.imag), r.multiplicity,
                    r.provenance.value])
    return buf.getvalue()


def resonances_from_csv(text: str) -> list[Resonance]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ValidationError(f"resonance CSV header must be {','.join(CSV_COLUMNS)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            re, im, mult, prov = row
            out.append(Resonance(complex(float(re), float(im)), int(mult), Provenance(prov)))
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"resonance CSV line {lineno}: {exc}") from None
    return out
