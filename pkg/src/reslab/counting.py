"""Resonance counting in strips: ``N(E, beta) = #{|mu| <= E, Im mu > -beta}``."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .exceptions import IncompleteSource, InsufficientData, ValidationError
from .resonances import Resonance, ResonanceLattice, ResonanceSet, WindowSpec

PER_UNIT_HALF_WIDTH = 1.0


def strip_resonances(source, E: float, beta: float) -> list[Resonance]:
    """Resonances with ``|Re mu| <= E`` and ``Im mu > -beta`` (multiplicity kept).

    Raises
    ------
    IncompleteSource
        If the source is not known to be complete on that region.
    """
    if E < 0 or beta <= 0:
        raise ValidationError("need E >= 0 and beta > 0")
    if isinstance(source, ResonanceLattice):
        top = max(E, 1.0)
        window = WindowSpec(-E - 1e-9, E + 1e-9, -beta, top)
        items = source.in_window(window)
    else:
        if isinstance(source, ResonanceSet):
            w = source.complete_window
            if w is not None and (w.re_min > -E or w.re_max < E or w.im_min > -beta):
                raise IncompleteSource(
                    f"resonance set is complete on {w}, which does not cover |Re| <= {E}, Im > -{beta}")
        items = list(source)
    return [r for r in items if abs(r.value.real) <= E and r.value.imag > -beta]


def count_in_strip(source, E: float, beta: float) -> int:
    """``N(E, beta)`` counted with multiplicity."""
    return sum(r.multiplicity for r in strip_resonances(source, E, beta) if abs(r.value) <= E)


def per_unit_window_max(points: Sequence[tuple[float, int]], E: float,
                        half_width: float = PER_UNIT_HALF_WIDTH) -> int:
    """Largest multiplicity-weighted count in ``{|Re mu - c| <= half_width}`` over centres ``0 <= c <= E``.

    ``points`` holds ``(Re mu, multiplicity)`` for the strip.  The maximum of
    this step function is attained at a centre where a window edge touches a
    point, or at an end of the centre range.
    """
    pts = sorted(points)
    xs = [x for x, _ in pts]
    cum = np.concatenate([[0], np.cumsum([m for _, m in pts])])
    centres = {0.0, float(E)}
    for x in xs:
        for c in (x - half_width, x + half_width):
            if 0.0 <= c <= E:
                centres.add(c)
    best = 0
    for c in centres:
        lo = bisect.bisect_left(xs, c - half_width - 1e-12)
        hi = bisect.bisect_right(xs, c + half_width + 1e-12)
        best = max(best, int(cum[hi] - cum[lo]))
    return best


@dataclass(frozen=True)
class CountReport:
    beta: float
    strip_counts: tuple[tuple[float, int], ...]
    per_unit_counts: tuple[int, ...]
    per_unit_max: int
    fitted_exponent: float | None = None
    exponent_half_width: float | None = None
    prefactor: float | None = None
    confidence: float = 0.95

    def __post_init__(self):
        counts = [n for _, n in self.strip_counts]
        if any(b < a for a, b in zip(counts, counts[1:])):
            raise ValidationError("strip counts must be nondecreasing in E")

    @property
    def per_unit_constant(self) -> bool:
        return len(set(self.per_unit_counts)) <= 1

    def as_items(self) -> list[tuple[str, object]]:
        items = [
            ("beta", self.beta),
            ("grid_points", len(self.strip_counts)),
            ("e_min", self.strip_counts[0][0] if self.strip_counts else None),
            ("e_max", self.strip_counts[-1][0] if self.strip_counts else None),
            ("per_unit_max", self.per_unit_max),
            ("per_unit_constant", self.per_unit_constant),
        ]
        if self.fitted_exponent is not None:
            items += [
                ("fitted_exponent", self.fitted_exponent),
                ("exponent_half_width", self.exponent_half_width),
                ("confidence", self.confidence),
                ("prefactor", self.prefactor),
            ]
        return items

    def table(self) -> list[tuple[float, int, int]]:
        return [(E, n, u) for (E, n), u in zip(self.strip_counts, self.per_unit_counts)]


def strip_count_report(source, E_grid: Sequence[float], beta: float) -> CountReport:
    """Counts and per-unit maxima on a grid, without a fit."""
    grid = sorted(float(E) for E in E_grid)
    if not grid:
        raise InsufficientData("empty energy grid")
    items = strip_resonances(source, grid[-1] + PER_UNIT_HALF_WIDTH, beta)
    counts, per_unit = [], []
    for E in grid:
        counts.append((E, sum(r.multiplicity for r in items if abs(r.value) <= E)))
        local = [(r.value.real, r.multiplicity) for r in items
                 if -PER_UNIT_HALF_WIDTH <= r.value.real <= E + PER_UNIT_HALF_WIDTH]
        per_unit.append(per_unit_window_max(local, E))
    return CountReport(beta, tuple(counts), tuple(per_unit), max(per_unit))


def growth_fit(source, E_grid: Sequence[float], beta: float, confidence: float = 0.95) -> CountReport:
    """Least-squares slope of ``log N`` against ``log E`` on the grid.

    The half-width is the two-sided Student-t interval of the slope at the
    given confidence.  ``prefactor`` is the least-squares ``c`` in ``N ~ c E``.

    Raises
    ------
    InsufficientData
        Fewer than 6 grid points, or ``N = 0`` at the smallest ``E``.
    """
    if len(E_grid) < 6:
        raise InsufficientData(f"growth_fit needs at least 6 grid points, got {len(E_grid)}")
    report = strip_count_report(source, E_grid, beta)
    E = np.array([e for e, _ in report.strip_counts])
    N = np.array([n for _, n in report.strip_counts], dtype=float)
    if N[0] < 1:
        raise InsufficientData("N(E) is zero at the smallest grid energy")
    fit = stats.linregress(np.log(E), np.log(N))
    q = stats.t.ppf(0.5 + confidence / 2, len(E) - 2)
    prefactor = float(np.dot(N, E) / np.dot(E, E))
    return CountReport(report.beta, report.strip_counts, report.per_unit_counts, report.per_unit_max,
                       float(fit.slope), float(q * fit.stderr), prefactor, confidence)


def growth_ratio(source, E: float, beta: float, delta: float) -> float:
    """``N(E, beta) / E^delta``; growing values witness ``N`` not being ``O(E^delta)``."""
    return count_in_strip(source, E, beta) / E ** delta


def geometric_grid(e_min: float, e_max: float, points: int) -> list[float]:
    if not 0 < e_min < e_max or points < 2:
        raise ValidationError("grid needs 0 < e_min < e_max and at least 2 points")
    # 12 significant digits keep the endpoints exact and the CSV readable
    return [float(f"{x:.12g}") for x in np.geomspace(e_min, e_max, points)]
