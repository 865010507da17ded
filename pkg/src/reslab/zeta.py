"""Dynamical zeta functions built from periodic-orbit data.

``zeta1(lam) = exp(-sum_c (w_c / t_c) e^{i lam t_c})`` where ``w_c`` is the
geometric weight of the period class at total period ``t_c``.  Its logarithmic
derivative is ``(1/i) sum_c w_c e^{i lam t_c}``.  The orbit series converges
only above an abscissa; below it, evaluation goes through the product
representation ``prod (1 - rho e^{i lam T})`` that lattice systems carry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .exceptions import DivergentRegion, InsufficientData, MissingPrimitiveData, ValidationError
from .systems import LatticeLine, PeriodicOrbitData

EPS = np.finfo(float).eps
_RATIO_WINDOW = 5


@dataclass(frozen=True)
class ZetaEvaluation:
    value: complex
    truncation_horizon: float
    tail_bound: float
    heuristic: bool = False
    method: str = "series"

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "truncation_horizon", float(self.truncation_horizon))
        object.__setattr__(self, "tail_bound", float(self.tail_bound))
        if not self.tail_bound >= 0:
            raise ValidationError("tail_bound must be nonnegative")


# --- orbit series -----------------------------------------------------------------

def _uniform_spacing(periods: Sequence[float]) -> bool:
    if len(periods) < 2:
        return True
    gaps = np.diff(periods)
    return bool(np.allclose(gaps, periods[0], rtol=1e-9)) or bool(np.allclose(gaps, gaps[0], rtol=1e-9))


def _series(terms: Iterable[tuple[float, complex]], uniform: bool):
    """Sum a sequence of ``(t, term)`` with early stop, divergence guard and tail bound.

    Returns ``(sum, last_t, tail_bound, heuristic)``.
    """
    total = 0j
    abs_total = 0.0
    mags: list[float] = []
    grow = 0
    last_t = 0.0
    stopped_early = False
    for t, a in terms:
        mag = abs(a)
        if mags and mag > mags[-1] * (1 + 1e-12):
            grow += 1
            if grow >= 3:
                raise DivergentRegion(
                    f"orbit-sum terms grew for 3 consecutive classes (t = {t:g}); "
                    "point lies below the convergence abscissa")
        else:
            grow = 0
        total += a
        abs_total += mag
        mags.append(mag)
        last_t = t
        if (len(mags) >= 3 and mags[-1] <= mags[-2] <= mags[-3]
                and mag < 1e-16 * abs(total)):
            stopped_early = True
            break
    roundoff = 4 * len(mags) * EPS * abs_total
    if not mags:
        return 0j, 0.0, 0.0, False
    if stopped_early:
        recent = mags[-_RATIO_WINDOW:]
    else:
        recent = mags[-_RATIO_WINDOW - 1:]
    ratios = [b / a for a, b in zip(recent, recent[1:]) if a > 0]
    if mags[-1] == 0.0:
        return total, last_t, roundoff, not uniform
    if not ratios:
        return total, last_t, math.inf, True
    # allow the polynomial prefactors of the terms (1/p and similar) to drift
    rho = max(ratios) * (1 + 1.0 / len(mags))
    if rho >= 1:
        return total, last_t, math.inf, True
    tail = mags[-1] * rho / (1 - rho)
    return total, last_t, tail + roundoff, not uniform


def _class_terms(data: PeriodicOrbitData, lam: complex, horizon: float, log_derivative: bool):
    for c in data.period_classes:
        if c.total_period > horizon * (1 + 1e-12):
            break
        phase = np.exp(1j * lam * c.total_period)
        if log_derivative:
            yield c.total_period, -1j * c.geometric_weight * phase
        else:
            yield c.total_period, c.geometric_weight / c.total_period * phase


def _series_exponent(data, lam, horizon, log_derivative):
    horizon = data.horizon if horizon is None else min(horizon, data.horizon)
    periods = [c.total_period for c in data.period_classes if c.total_period <= horizon * (1 + 1e-12)]
    return _series(_class_terms(data, complex(lam), horizon, log_derivative), _uniform_spacing(periods))


# --- product representation ---------------------------------------------------------

def _as_lines(lines) -> list[LatticeLine]:
    out = []
    for line in lines:
        if isinstance(line, LatticeLine):
            out.append(line)
        elif len(line) == 2:
            out.append(LatticeLine(complex(line[0]), float(line[1]), 1))
        else:
            out.append(LatticeLine(complex(line[0]), float(line[1]), int(line[2])))
    return out


def product_form_zeta1(lattice_lines, lam: complex) -> complex:
    """``prod (1 - r e^{i lam T})`` over ``(r, T)`` (or ``(r, T, multiplicity)``) lines."""
    out = 1.0 + 0j
    for line in _as_lines(lattice_lines):
        out *= (1 - line.rate * np.exp(1j * lam * line.spacing)) ** line.multiplicity
    return complex(out)


def product_form_log_derivative(lattice_lines, lam):
    lam = np.asarray(lam, dtype=complex)
    out = np.zeros_like(lam)
    for line in _as_lines(lattice_lines):
        x = line.rate * np.exp(1j * lam * line.spacing)
        out = out + line.multiplicity * (-1j * line.spacing) * x / (1 - x)
    return out


def _remainder_bounds(data: PeriodicOrbitData, lam: complex) -> tuple[float, float]:
    """Bounds on the omitted lines' contribution to ``log zeta1`` and to its derivative."""
    y = complex(lam).imag
    exp_bound = deriv_bound = 0.0
    for rem in data.line_remainders:
        if rem.mass == 0:
            continue
        scale = math.exp(-y * rem.spacing)
        top = rem.max_rate * scale
        if top >= 1:
            return math.inf, math.inf
        exp_bound += rem.mass * scale / (1 - top)
        deriv_bound += rem.spacing * rem.mass * scale / (1 - top)
    return exp_bound, deriv_bound


def lattice_abscissa(data: PeriodicOrbitData) -> float:
    """Exact convergence abscissa of the orbit series for product-form data."""
    if not data.lines:
        return -math.inf
    return max(math.log(abs(l.rate)) / l.spacing for l in data.lines if l.rate != 0)


def _use_series(data: PeriodicOrbitData, lam: complex, method: str) -> bool:
    if method == "series":
        return True
    if method == "product":
        if data.lines is None:
            raise ValidationError("orbit data carries no product representation")
        return False
    if method != "auto":
        raise ValidationError(f"unknown method {method!r}")
    if data.lines is None:
        return True
    t_min = min((l.spacing for l in data.lines), default=1.0)
    margin = 37.0 / max(data.horizon, t_min)
    return complex(lam).imag >= lattice_abscissa(data) + margin


# --- public evaluators --------------------------------------------------------------

def zeta1_log_derivative(data: PeriodicOrbitData, lam: complex, horizon: float | None = None,
                         method: str = "auto") -> ZetaEvaluation:
    """``d/dlam log zeta1(lam)``.

    ``method`` is ``"series"`` (truncated orbit sum), ``"product"`` (lattice
    product form, valid below the abscissa) or ``"auto"``.
    """
    lam = complex(lam)
    if _use_series(data, lam, method):
        total, last_t, tail, heuristic = _series_exponent(data, lam, horizon, log_derivative=True)
        return ZetaEvaluation(total, last_t, tail, heuristic, "series")
    value = complex(product_form_log_derivative(data.lines, lam))
    _, deriv_bound = _remainder_bounds(data, lam)
    return ZetaEvaluation(value, math.inf, deriv_bound + 8 * EPS * abs(value), False, "product")


def zeta1(data: PeriodicOrbitData, lam: complex, horizon: float | None = None,
          method: str = "auto") -> ZetaEvaluation:
    """Evaluate ``zeta1`` with a bound on the truncation error of the value."""
    lam = complex(lam)
    if _use_series(data, lam, method):
        exponent, last_t, tail, heuristic = _series_exponent(data, lam, horizon, log_derivative=False)
        value = complex(np.exp(-exponent))
        bound = abs(value) * math.expm1(tail) if math.isfinite(tail) else math.inf
        return ZetaEvaluation(value, last_t, bound, heuristic, "series")
    value = product_form_zeta1(data.lines, lam)
    exp_bound, _ = _remainder_bounds(data, lam)
    bound = abs(value) * math.expm1(exp_bound) if math.isfinite(exp_bound) else math.inf
    n_factors = sum(l.multiplicity for l in data.lines)
    return ZetaEvaluation(value, math.inf, bound + 4 * n_factors * EPS * abs(value), False, "product")


def ruelle_zeta(data: PeriodicOrbitData, lam: complex, horizon: float | None = None) -> ZetaEvaluation:
    """Truncated product ``prod_{primitive} (1 - e^{-lam T#})``.

    Raises
    ------
    MissingPrimitiveData
        If the data carries neither primitive orbits nor primitive counts.
    """
    counts = data.primitive_period_counts
    if counts is None:
        if data.primitive_orbits is None:
            raise MissingPrimitiveData("ruelle_zeta needs primitive orbit data")
        counts = tuple((o.primitive_period, 1) for o in data.primitive_orbits)
    horizon = data.horizon if horizon is None else min(horizon, data.horizon)
    lam = complex(lam)
    log_total = 0j
    terms = []
    for T, n in sorted(counts):
        if T > horizon * (1 + 1e-12):
            break
        x = np.exp(-lam * T)
        if abs(x) >= 1:
            raise DivergentRegion(f"factor 1 - e^(-lam T) is not near 1 at T = {T:g}")
        log_total += n * np.log1p(-x)
        terms.append(float(n) * abs(x) / (1 - abs(x)))
    value = complex(np.exp(log_total))
    tail, heuristic = 0.0, True
    if len(terms) >= 2:
        recent = terms[-_RATIO_WINDOW - 1:]
        ratios = [b / a for a, b in zip(recent, recent[1:]) if a > 0]
        rho = max(ratios) if ratios else 1.0
        tail = terms[-1] * rho / (1 - rho) if rho < 1 else math.inf
    bound = abs(value) * math.expm1(tail) if math.isfinite(tail) else math.inf
    return ZetaEvaluation(value, horizon, bound, heuristic, "product")


def abscissa_estimate(data: PeriodicOrbitData) -> float:
    """Growth rate of ``|w_c|`` against ``t_c`` by least squares.

    The orbit series converges for ``Im lam`` above the returned slope.
    """
    pts = [(c.total_period, math.log(abs(c.geometric_weight)))
           for c in data.period_classes if c.geometric_weight != 0]
    if len(pts) < 4:
        raise InsufficientData("abscissa_estimate needs at least 4 nonzero period classes")
    t, logw = np.array(pts).T
    if np.ptp(logw) == 0:
        return 0.0
    return float(stats.linregress(t, logw).slope)


class ZetaFunction:
    """``zeta1`` of a system as a callable with a logarithmic derivative.

    This is the object the argument-principle counter and the Newton refiner
    work with.  Evaluation is vectorised over numpy arrays when the product
    representation is in use.
    """

    def __init__(self, data: PeriodicOrbitData, method: str = "auto"):
        self.data = data
        self.method = method

    def _vectorised(self) -> bool:
        return self.data.lines is not None and self.method in ("auto", "product")

    def __call__(self, lam):
        if self._vectorised():
            lam = np.asarray(lam, dtype=complex)
            out = np.ones_like(lam)
            for line in self.data.lines:
                out = out * (1 - line.rate * np.exp(1j * lam * line.spacing)) ** line.multiplicity
            return out if out.ndim else complex(out)
        return np.vectorize(lambda z: zeta1(self.data, z, method=self.method).value,
                            otypes=[complex])(lam)

    def log_derivative(self, lam):
        if self._vectorised():
            out = product_form_log_derivative(self.data.lines, lam)
            return out if np.ndim(out) else complex(out)
        return np.vectorize(lambda z: zeta1_log_derivative(self.data, z, method=self.method).value,
                            otypes=[complex])(lam)

    @property
    def spacing_hint(self) -> float:
        """Horizontal spacing ``2 pi / T_max`` of the densest lattice line."""
        if self.data.lines:
            return 2 * math.pi / max(l.spacing for l in self.data.lines)
        return 2 * math.pi


class AnalyticFunction:
    """Wrap a pair ``(f, f'/f)`` of callables for the zero counter."""

    def __init__(self, func, log_derivative, spacing_hint: float = 1.0):
        self._f = func
        self._ld = log_derivative
        self.spacing_hint = spacing_hint

    def __call__(self, lam):
        return self._f(lam)

    def log_derivative(self, lam):
        return self._ld(lam)
