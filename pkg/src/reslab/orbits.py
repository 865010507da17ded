"""Periodic-orbit data types and per-orbit arithmetic.

The linearised return map of a closed orbit is stored in the *backward*
convention: ``backward_poincare_eigenvalues`` is the spectrum of the derivative
of the time ``-T`` map restricted to a transversal.  Stable directions of the
flow are expanded by the backward map, so exactly ``stable_count`` of these
eigenvalues lie outside the unit circle.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .exceptions import NonHyperbolic, ValidationError

HYPERBOLICITY_TOLERANCE = 1e-9


def _as_complex_tuple(values: Iterable) -> tuple[complex, ...]:
    return tuple(complex(v) for v in values)


def power(e: complex, n: int) -> complex:
    """``e**n`` through the modulus/argument decomposition.

    Real inputs stay real (sign handled exactly), so determinants of real
    spectra carry no spurious imaginary parts.
    """
    e = complex(e)
    if e.imag == 0.0:
        r = abs(e.real) ** n
        return complex(-r if (e.real < 0 and n % 2) else r)
    modulus, arg = abs(e), cmath.phase(e)
    return cmath.rect(math.exp(n * math.log(modulus)), n * arg)


def check_hyperbolic(eigenvalues: Sequence[complex], tol: float = HYPERBOLICITY_TOLERANCE) -> None:
    for e in eigenvalues:
        if e == 0 or abs(math.log(abs(e))) < tol:
            raise NonHyperbolic(f"eigenvalue {e!r} is not hyperbolic (|log|e|| < {tol})")


def det_factor(eigenvalues: Sequence[complex], repetition: int) -> float:
    """Return ``|det(I - P^n)| = |prod_j (1 - e_j^n)|``.

    Raises
    ------
    NonHyperbolic
        If any ``|log|e_j||`` is below the hyperbolicity tolerance.
    """
    check_hyperbolic(eigenvalues)
    return abs(signed_det(eigenvalues, repetition))


def signed_det(eigenvalues: Sequence[complex], repetition: int) -> complex:
    """``det(I - P^n)`` without the absolute value."""
    if repetition < 1:
        raise ValidationError("repetition must be >= 1")
    out = 1.0 + 0.0j
    for e in eigenvalues:
        out *= 1.0 - power(e, repetition)
    return out


def orientation_sign(stable_count: int, epsilon: int, repetition: int) -> int:
    """The sign ``(-1)^(s + n*eps)`` relating ``det(I-P^n)`` to its modulus."""
    return -1 if (stable_count + repetition * epsilon) % 2 else 1


def iterate_weight(weight_eigenvalues: Sequence[complex], repetition: int) -> complex:
    """Power sum ``Tr(alpha^n) = sum_l a_l^n``."""
    if not weight_eigenvalues:
        raise ValidationError("weight eigenvalue list is empty")
    return sum((power(a, repetition) for a in weight_eigenvalues), 0j)


@dataclass(frozen=True)
class PrimitiveOrbit:
    id: str
    primitive_period: float
    backward_poincare_eigenvalues: tuple[complex, ...]
    stable_count: int
    stable_orientable: bool = True
    weight_eigenvalues: tuple[complex, ...] = (1.0 + 0j,)

    def __post_init__(self):
        object.__setattr__(self, "backward_poincare_eigenvalues",
                           _as_complex_tuple(self.backward_poincare_eigenvalues))
        object.__setattr__(self, "weight_eigenvalues", _as_complex_tuple(self.weight_eigenvalues))
        if not (self.primitive_period > 0 and math.isfinite(self.primitive_period)):
            raise ValidationError(f"orbit {self.id}: primitive_period must be positive and finite")
        if not self.weight_eigenvalues:
            raise ValidationError(f"orbit {self.id}: weight_eigenvalues must be nonempty")
        try:
            check_hyperbolic(self.backward_poincare_eigenvalues)
        except NonHyperbolic as exc:
            raise NonHyperbolic(f"orbit {self.id}: {exc}") from None
        expanding = sum(abs(e) > 1 for e in self.backward_poincare_eigenvalues)
        if expanding != self.stable_count:
            raise ValidationError(
                f"orbit {self.id}: stable_count={self.stable_count} but {expanding} backward "
                "eigenvalues lie outside the unit circle")

    @property
    def epsilon(self) -> int:
        return 0 if self.stable_orientable else 1

    @property
    def transverse_dimension(self) -> int:
        return len(self.backward_poincare_eigenvalues)

    def stable_eigenvalues(self) -> tuple[complex, ...]:
        return tuple(e for e in self.backward_poincare_eigenvalues if abs(e) > 1)

    def unstable_eigenvalues(self) -> tuple[complex, ...]:
        return tuple(e for e in self.backward_poincare_eigenvalues if abs(e) < 1)

    def iterate(self, repetition: int) -> "OrbitIterate":
        return OrbitIterate(self, repetition)


@dataclass(frozen=True)
class FixedPointDatum:
    """Hyperbolic zero of the vector field, ``d phi^t = exp(tA)`` at the point.

    ``generator_eigenvalues`` is the spectrum of ``A``; the bundle transport
    has eigenvalues ``exp(-mu_l t)`` with ``mu_l`` in
    ``weight_generator_eigenvalues``.
    """

    id: str
    generator_eigenvalues: tuple[complex, ...]
    stable_count: int
    weight_generator_eigenvalues: tuple[complex, ...] = (0j,)

    def __post_init__(self):
        object.__setattr__(self, "generator_eigenvalues", _as_complex_tuple(self.generator_eigenvalues))
        object.__setattr__(self, "weight_generator_eigenvalues",
                           _as_complex_tuple(self.weight_generator_eigenvalues))
        if not self.weight_generator_eigenvalues:
            raise ValidationError(f"fixed point {self.id}: weight_generator_eigenvalues must be nonempty")
        for lam in self.generator_eigenvalues:
            if abs(lam.real) < HYPERBOLICITY_TOLERANCE:
                raise NonHyperbolic(f"fixed point {self.id}: eigenvalue {lam!r} has zero real part")
        negative = sum(lam.real < 0 for lam in self.generator_eigenvalues)
        if negative != self.stable_count:
            raise ValidationError(
                f"fixed point {self.id}: stable_count={self.stable_count} but {negative} "
                "eigenvalues have negative real part")

    @property
    def dimension(self) -> int:
        return len(self.generator_eigenvalues)

    def trace_density(self, t):
        """Flat-trace density ``(-1)^s sum_l e^{-mu_l t} / prod_j (1 - e^{-lambda_j t})``.

        Vectorised over ``t > 0``; ``expm1`` keeps the small-``t`` end accurate.
        """
        t = np.asarray(t, dtype=float)
        out = sum(np.exp(-mu * t) for mu in self.weight_generator_eigenvalues) * np.ones_like(t, dtype=complex)
        for lam in self.generator_eigenvalues:
            if lam.real > 0:
                out = out / (-np.expm1(-lam * t))
            else:
                # 1/(1 - e^{-lam t}) = -e^{lam t}/(1 - e^{lam t}) stays bounded for large t
                out = out * (-np.exp(lam * t) / (-np.expm1(lam * t)))
        return (-1) ** self.stable_count * out


@dataclass(frozen=True)
class OrbitIterate:
    orbit: PrimitiveOrbit
    repetition: int

    def __post_init__(self):
        if self.repetition < 1:
            raise ValidationError("repetition must be >= 1")

    @property
    def total_period(self) -> float:
        return self.repetition * self.orbit.primitive_period


@dataclass(frozen=True, order=True)
class PeriodClass:
    """All orbit iterates sharing one total period, with their summed weight
    ``sum T# Tr(alpha^n) / |det(I - P^n)|``."""

    total_period: float
    geometric_weight: complex = field(compare=False)


def geometric_term(orbit: PrimitiveOrbit, repetition: int) -> complex:
    """``T# * Tr(alpha^n) / |det(I - P^n)|`` for the ``n``-th iterate."""
    return (orbit.primitive_period * iterate_weight(orbit.weight_eigenvalues, repetition)
            / det_factor(orbit.backward_poincare_eigenvalues, repetition))


def aggregate_classes(terms: Iterable[tuple[float, complex]], rel_tol: float = 1e-12) -> list[PeriodClass]:
    """Group ``(total_period, weight)`` pairs into period classes.

    Periods closer than ``rel_tol`` (relative) are merged; summation runs in
    ascending period order so results are reproducible.
    """
    classes: list[list] = []
    for t, w in sorted(terms, key=lambda tw: tw[0]):
        if classes and abs(t - classes[-1][0]) <= rel_tol * max(1.0, t):
            classes[-1][1] += w
        else:
            classes.append([t, complex(w)])
    return [PeriodClass(t, w) for t, w in classes]


# --- expansion of 1/|det(I - P^n)| into geometric series -------------------

def _expansion_steps(orbit: PrimitiveOrbit):
    """Per-direction ratios ``q_j`` with ``|q_j| < 1`` and the starting index.

    Stable (backward-expanding) directions contribute ``sum_{k>=1} e^{-k}``,
    unstable ones ``sum_{k>=0} e^{k}``.
    """
    steps = []
    for e in orbit.backward_poincare_eigenvalues:
        if abs(e) > 1:
            steps.append((1.0 / e, 1))
        else:
            steps.append((e, 0))
    return steps


def expanded_inverse_det(orbit: PrimitiveOrbit, repetition: int, truncation: int) -> complex:
    """Truncated series for ``1/|det(I - P^n)|``.

    Uses ``(-1)^{n eps} prod_j sum_k q_j^{n k}`` with every index capped at
    ``truncation`` terms; the square truncation factorises, so this is a
    product of one-dimensional partial sums.
    """
    n = repetition
    out = complex(orientation_sign(0, orbit.epsilon, n))
    for q, start in _expansion_steps(orbit):
        qn = power(q, n)
        out *= sum(power(qn, k) for k in range(start, start + truncation))
    return out


@dataclass(frozen=True)
class ExpansionRates:
    """Line rates ``rho`` of one primitive orbit.

    ``Tr(alpha^n)/|det(I-P^n)| = sum rho^n`` over all rates (with
    multiplicity).  Only rates with ``|rho| >= min_modulus`` are listed;
    ``omitted_mass`` bounds ``sum |rho|`` over the rest and ``omitted_max``
    bounds any single omitted ``|rho|``.
    """

    rates: tuple[tuple[complex, int], ...]
    omitted_mass: float
    omitted_max: float


def expansion_rates(orbit: PrimitiveOrbit, min_modulus: float) -> ExpansionRates:
    sign = -1.0 if orbit.epsilon else 1.0
    steps = _expansion_steps(orbit)
    logq = [math.log(abs(q)) for q, _ in steps]
    found: dict[complex, int] = {}
    omitted_max = 0.0
    log_floor = math.log(min_modulus) if min_modulus > 0 else -math.inf

    def walk(j, value, log_mod):
        nonlocal omitted_max
        if j == len(steps):
            if log_mod >= log_floor:
                found[value] = found.get(value, 0) + 1
            else:
                omitted_max = max(omitted_max, math.exp(log_mod))
            return
        q, start = steps[j]
        k = start
        v = value * power(q, k)
        lm = log_mod + k * logq[j]
        # later factors only shrink the modulus, so stop once below the floor
        while lm >= log_floor:
            walk(j + 1, v, lm)
            v *= q
            lm += logq[j]
            k += 1
        omitted_max = max(omitted_max, math.exp(lm) * math.prod(
            abs(qq) ** s for qq, s in steps[j + 1:]))

    for a in orbit.weight_eigenvalues:
        if a == 0:
            continue
        walk(0, sign * a, math.log(abs(a)))

    total = sum(abs(a) for a in orbit.weight_eigenvalues) * math.prod(
        abs(q) ** s / (1 - abs(q)) for q, s in steps)
    listed = sum(abs(r) * m for r, m in found.items())
    omitted = max(total - listed, 0.0) + 4 * np.finfo(float).eps * total
    rates = tuple(sorted(found.items(), key=lambda rm: (-abs(rm[0]), rm[0].imag, rm[0].real)))
    return ExpansionRates(rates, omitted, omitted_max)
