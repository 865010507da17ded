"""Local trace formula checks with compactly supported bump test functions.

The geometric side sums orbit weights against ``phi_{l,d}``; the spectral side
sums ``phi_hat`` over resonances.  Fourier convention::

    phi_hat(mu) = \\int e^{-i mu t} phi(t) dt

so that ``<sum_mu e^{-i mu t}, phi> = sum_mu phi_hat(mu)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import roots_legendre

from .exceptions import AccuracyDomainExceeded, HorizonTooShort, ValidationError
from .resonances import Resonance, ResonanceLattice
from .systems import PeriodicOrbitData

IBP_ORDER = 8
IMAG_DOMAIN = 50.0
DEFAULT_TAIL_TARGET = 1e-11
MAX_RE_CUTOFF = 1e4
_CHUNK = 4096


@dataclass(frozen=True)
class BumpSpec:
    """``phi_{l,d}(t) = phi((t - d) / l)``, supported on ``[d - l, d + l]``."""

    l: float
    d: float
    quadrature_order: int = 200

    def __post_init__(self):
        # d = 1 is admitted: the support [1 - l, 1 + l] still avoids t = 0
        if not 0 < self.l < 1 <= self.d:
            raise ValidationError(f"bump needs 0 < l < 1 <= d, got l={self.l}, d={self.d}")
        if self.quadrature_order < 8:
            raise ValidationError("quadrature_order must be >= 8")

    @property
    def support(self) -> tuple[float, float]:
        return self.d - self.l, self.d + self.l


def bump_unit(x):
    """``phi(x) = exp(1 - 1/(1 - x^2))`` on ``|x| < 1``, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out if out.ndim else float(out)


def bump_value(spec: BumpSpec, t):
    return bump_unit((np.asarray(t, dtype=float) - spec.d) / spec.l)


@lru_cache(maxsize=256)
def _legendre(order: int):
    x, w = roots_legendre(order)
    return x, w * bump_unit(x)


def _order_for(spec: BumpSpec, xi_max: float) -> int:
    # oscillation e^{-i xi x} needs roughly 0.75 |xi| nodes beyond the smooth baseline
    # rounded up to a multiple of 32 so the node cache stays small
    need = int(math.ceil(0.75 * xi_max)) + 50
    return max(spec.quadrature_order, 32 * -(-need // 32))


def bump_fourier(spec: BumpSpec, mu):
    """``phi_hat_{l,d}(mu)`` by Gauss-Legendre quadrature on the support.

    Uses ``phi_hat_{l,d}(mu) = l e^{-i d mu} phi_hat_{1,0}(l mu)``.  Accepts
    scalars or arrays.

    Raises
    ------
    AccuracyDomainExceeded
        If ``|Im mu| > 50 / l``.
    """
    mu = np.asarray(mu, dtype=complex)
    scalar = mu.ndim == 0
    mu = np.atleast_1d(mu)
    if mu.size and np.max(np.abs(mu.imag)) > IMAG_DOMAIN / spec.l:
        raise AccuracyDomainExceeded(
            f"|Im mu| exceeds {IMAG_DOMAIN}/l = {IMAG_DOMAIN / spec.l:.6g}")
    xi = spec.l * mu
    out = np.empty_like(mu)
    need = np.ceil(0.75 * np.abs(xi.real)).astype(int) + 50
    orders = np.maximum(spec.quadrature_order, 32 * -(-need // 32))
    for order in np.unique(orders):
        sel = np.nonzero(orders == order)[0]
        x, wphi = _legendre(int(order))
        for start in range(0, sel.size, _CHUNK):
            idx = sel[start:start + _CHUNK]
            phase = np.exp(-1j * np.outer(xi[idx], x))
            out[idx] = phase @ wphi
    out = spec.l * np.exp(-1j * spec.d * mu) * out
    return complex(out[0]) if scalar else out


# --- integration-by-parts bounds ---------------------------------------------------

@lru_cache(maxsize=1)
def derivative_l1_norms(max_order: int = IBP_ORDER) -> tuple[float, ...]:
    """Upper bounds for ``||phi^(k)||_{L^1(-1,1)}``, ``k = 0..max_order``.

    ``phi^(k) = Q_k phi / u^(2k)`` with ``u = 1 - x^2`` and
    ``Q_{k+1} = Q_k' u^2 + 4 k x u Q_k - 2 x Q_k``.  The integral of the
    absolute value is taken on a dense uniform grid and padded by a small
    relative margin.
    """
    P = np.polynomial.Polynomial
    u = P([1.0, 0.0, -1.0])
    x = P([0.0, 1.0])
    q = P([1.0])
    grid = np.linspace(-1.0, 1.0, 400001)[1:-1]
    ug = 1.0 - grid * grid
    log_phi = 1.0 - 1.0 / ug
    h = grid[1] - grid[0]
    norms = []
    for k in range(max_order + 1):
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            vals = np.abs(q(grid)) * np.exp(log_phi - 2 * k * np.log(ug))
        norms.append(float(np.sum(vals) * h) * (1 + 1e-6))
        q = q.deriv() * u * u + 4 * k * x * u * q - 2 * x * q
    return tuple(norms)


def fourier_bound(spec: BumpSpec, mu: complex) -> float:
    """Rigorous bound on ``|phi_hat_{l,d}(mu)|`` (best integration-by-parts order)."""
    a, b = spec.support
    sup = math.exp(max(mu.imag * a, mu.imag * b))
    norms = derivative_l1_norms()
    r = abs(mu)
    best = sup * spec.l * norms[0]
    for k in range(1, IBP_ORDER + 1):
        if r > 0:
            best = min(best, sup * spec.l ** (1 - k) * norms[k] / r ** k)
    return best


def line_tail_bound(spec: BumpSpec, im: float, step: float, cutoff: float) -> float:
    """Bound on ``sum |phi_hat(x + i im)|`` over an arithmetic row with spacing ``step``, ``|x| > cutoff``."""
    if cutoff <= 0:
        return math.inf
    a, b = spec.support
    sup = math.exp(max(im * a, im * b))
    norms = derivative_l1_norms()
    best = math.inf
    for k in range(2, IBP_ORDER + 1):
        row = 2.0 * (cutoff ** -k + cutoff ** (1 - k) / (step * (k - 1)))
        best = min(best, sup * spec.l ** (1 - k) * norms[k] * row)
    return best


def _cutoff_for(spec: BumpSpec, im: float, step: float, target: float) -> float:
    """Smallest cutoff (doubling search, then bisection) whose line tail is below ``target``."""
    lo, hi = 0.0, max(step, 1.0)
    while line_tail_bound(spec, im, step, hi) > target:
        lo, hi = hi, 2 * hi
        if hi > MAX_RE_CUTOFF:
            return MAX_RE_CUTOFF
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if mid > 0 and line_tail_bound(spec, im, step, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


# --- the two sides -----------------------------------------------------------------

def geometric_side(data: PeriodicOrbitData, spec: BumpSpec) -> complex:
    """``sum_classes w * phi_{l,d}(T)`` plus the smooth fixed-point contribution.

    Raises
    ------
    HorizonTooShort
        If the orbit data stops before ``d + l``.
    """
    lo, hi = spec.support
    if data.horizon < hi:
        raise HorizonTooShort(f"orbit horizon {data.horizon} is shorter than d + l = {hi}")
    re, im = [], []
    for c in data.period_classes:
        if lo < c.total_period < hi:
            v = c.geometric_weight * float(bump_value(spec, c.total_period))
            re.append(v.real)
            im.append(v.imag)
    for fp in data.fixed_points:
        x, wphi = _legendre(spec.quadrature_order)
        v = complex(spec.l * np.sum(wphi * fp.trace_density(spec.d + spec.l * x)))
        re.append(v.real)
        im.append(v.imag)
    return complex(math.fsum(re), math.fsum(im))


@dataclass(frozen=True)
class SpectralSum:
    value: complex
    tail_bound: float
    terms: int
    re_cutoff: float | None


def _sum_sorted(values: np.ndarray, mus: np.ndarray) -> complex:
    order = np.lexsort((mus.imag, np.abs(mus.real)))
    v = values[order]
    return complex(math.fsum(v.real), math.fsum(v.imag))


def spectral_side(resonances, spec: BumpSpec, A: float, re_cutoff: float | None = None, *,
                  tail_target: float = DEFAULT_TAIL_TARGET) -> SpectralSum:
    """``sum multiplicity * phi_hat(mu)`` over ``Im mu > -A``, ``|Re mu| <= re_cutoff``.

    ``resonances`` is either a :class:`ResonanceLattice` (summed row by row,
    with the tail of every row beyond the cutoff bounded rigorously) or a
    finite list of :class:`Resonance`; for a list the tail bound covers only
    the listed points that the cutoff drops.

    With ``re_cutoff=None`` each lattice row gets its own cutoff, the smallest
    for which its tail bound is below ``tail_target / rows``.
    """
    if isinstance(resonances, ResonanceLattice):
        return _lattice_spectral_side(resonances, spec, A, re_cutoff, tail_target)
    items = [r for r in resonances if r.value.imag > -A]
    if not items:
        return SpectralSum(0j, 0.0, 0, re_cutoff)
    cut = math.inf if re_cutoff is None else re_cutoff
    kept = [r for r in items if abs(r.value.real) <= cut]
    dropped = [r for r in items if abs(r.value.real) > cut]
    tail = math.fsum(r.multiplicity * fourier_bound(spec, r.value) for r in dropped)
    if not kept:
        return SpectralSum(0j, tail, 0, re_cutoff)
    mus = np.array([r.value for r in kept])
    mult = np.array([r.multiplicity for r in kept], dtype=float)
    vals = mult * bump_fourier(spec, mus)
    return SpectralSum(_sum_sorted(vals, mus), tail, len(kept), re_cutoff)


def _lattice_spectral_side(lattice: ResonanceLattice, spec, A, re_cutoff, tail_target) -> SpectralSum:
    content = lattice.strip(-A)
    lines = [ln for ln in content.lines if ln[0].imag > -A]
    points = [p for p in content.points if p[0].imag > -A]
    share = tail_target / max(len(lines), 1)
    mus, weights = [], []
    tail = 0.0
    for offset, step, mult in lines:
        cut = re_cutoff if re_cutoff is not None else _cutoff_for(spec, offset.imag, step, share)
        n_lo = math.ceil((-cut - offset.real) / step)
        n_hi = math.floor((cut - offset.real) / step)
        n = np.arange(n_lo, n_hi + 1)
        mus.append(offset + step * n)
        weights.append(np.full(n.size, float(mult)))
        # rows beyond the cutoff on both sides; the nearest dropped point sits at >= cut
        tail += mult * line_tail_bound(spec, offset.imag, step, max(cut, step))
    for value, mult in points:
        mus.append(np.array([value]))
        weights.append(np.array([float(mult)]))
    if not mus:
        return SpectralSum(0j, 0.0, 0, re_cutoff)
    mus = np.concatenate(mus)
    weights = np.concatenate(weights)
    vals = weights * bump_fourier(spec, mus)
    return SpectralSum(_sum_sorted(vals, mus), tail, int(mus.size), re_cutoff)


# --- trace check ---------------------------------------------------------------------

@dataclass(frozen=True)
class TraceReport:
    geometric_side: complex
    spectral_side: complex
    strip_depth: float
    spectral_tail_bound: float
    residual: complex
    bound_shape_value: float
    l: float
    d: float
    C: float = 1.0
    epsilon: float = 0.1
    dimension: int = 3
    re_cutoff: float | None = None
    spectral_terms: int = 0
    line_complete: bool = False

    def __post_init__(self):
        if not self.spectral_tail_bound >= 0:
            raise ValidationError("spectral_tail_bound must be nonnegative")

    @property
    def within_bound_shape(self) -> bool:
        return abs(self.residual) <= self.bound_shape_value + self.spectral_tail_bound

    def as_items(self) -> list[tuple[str, object]]:
        return [
            ("geometric_side", self.geometric_side),
            ("spectral_side", self.spectral_side),
            ("residual", self.residual),
            ("abs_residual", abs(self.residual)),
            ("spectral_tail_bound", self.spectral_tail_bound),
            ("strip_depth", self.strip_depth),
            ("line_complete", self.line_complete),
            ("re_cutoff", "adaptive" if self.re_cutoff is None else self.re_cutoff),
            ("spectral_terms", self.spectral_terms),
            ("l", self.l),
            ("d", self.d),
            ("bound_C", self.C),
            ("bound_epsilon", self.epsilon),
            ("bound_dimension", self.dimension),
            ("bound_shape_value", self.bound_shape_value),
            ("within_bound_shape", self.within_bound_shape),
        ]


def bound_shape(spec: BumpSpec, A: float, C: float = 1.0, epsilon: float = 0.1, dimension: int = 3) -> float:
    """``C l^{-2n-2} e^{(d-l)(-A+eps)}``."""
    return C * spec.l ** (-2 * dimension - 2) * math.exp((spec.d - spec.l) * (-A + epsilon))


def line_complete_depth(spec: BumpSpec, decay: float = 40.0) -> float:
    """Strip depth standing in for ``A = infinity``.

    A row at ``Im = -A`` contributes about ``e^{-A (d - l)}``; ``decay = 40``
    puts that below ``1e-17``.  Capped inside the quadrature domain.
    """
    return min(decay / (spec.d - spec.l), 0.9 * IMAG_DOMAIN / spec.l)


def trace_check(data: PeriodicOrbitData, source, spec: BumpSpec, A: float | None = None, *,
                re_cutoff: float | None = None, C: float = 1.0, epsilon: float = 0.1,
                tail_target: float = DEFAULT_TAIL_TARGET) -> TraceReport:
    """Compare both sides of the trace formula for ``phi_{l,d}``.

    ``A=None`` requests line-complete summation: every lattice row that can
    contribute above double precision is included.
    """
    line_complete = A is None
    depth = line_complete_depth(spec) if line_complete else float(A)
    geo = geometric_side(data, spec)
    spec_sum = spectral_side(source, spec, depth, re_cutoff, tail_target=tail_target)
    return TraceReport(
        geometric_side=geo,
        spectral_side=spec_sum.value,
        strip_depth=depth,
        spectral_tail_bound=spec_sum.tail_bound,
        residual=geo - spec_sum.value,
        bound_shape_value=bound_shape(spec, depth, C, epsilon, data.ambient_dimension),
        l=spec.l,
        d=spec.d,
        C=C,
        epsilon=epsilon,
        dimension=data.ambient_dimension,
        re_cutoff=re_cutoff,
        spectral_terms=spec_sum.terms,
        line_complete=line_complete,
    )
