"""Independent reference computations used by the tests.

Nothing here imports the library's numerical code: oracles are brute force,
closed form or arbitrary precision.
"""
from __future__ import annotations

import cmath
import itertools
import math

import mpmath
import numpy as np


# --- orbit arithmetic ---------------------------------------------------------------

def det_identity_minus_power(eigs, n):
    """``|det(I - M^n)|`` for a diagonal matrix, by explicit matrix power."""
    m = np.diag(np.asarray(eigs, dtype=complex))
    return abs(np.linalg.det(np.eye(len(eigs)) - np.linalg.matrix_power(m, n)))


def companion(coeffs):
    """Companion matrix of the monic polynomial with the given lower coefficients."""
    k = len(coeffs)
    m = np.zeros((k, k))
    m[1:, :-1] = np.eye(k - 1)
    m[:, -1] = -np.asarray(coeffs)
    return m


def integer_matrix_power(m, p):
    out = [[1, 0], [0, 1]]
    for _ in range(p):
        out = [[sum(out[i][k] * m[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    return out


def toral_fixed_points(m, p):
    a = integer_matrix_power(m, p)
    return abs((a[0][0] - 1) * (a[1][1] - 1) - a[0][1] * a[1][0])


# --- horseshoe brute force ---------------------------------------------------------

def is_primitive(word):
    n = len(word)
    return all(word != word[d:] + word[:d] for d in range(1, n) if n % d == 0)


def necklaces(k, length):
    """Primitive necklaces of a given length, by filtering all words."""
    seen = set()
    for w in itertools.product(range(k), repeat=length):
        if not is_primitive(w):
            continue
        rep = min(w[i:] + w[:i] for i in range(length))
        seen.add(rep)
    return sorted(seen)


def horseshoe_class_weight_bruteforce(mu, nu, weights, p, roof=1.0):
    """Sum over primitive words ``w`` with ``|w|`` dividing ``p`` of ``|w| T g_w^n / |det|``."""
    total = 0.0
    for q in range(1, p + 1):
        if p % q:
            continue
        n = p // q
        for w in necklaces(len(weights), q):
            g = math.prod(weights[i] for i in w)
            # backward spectrum {nu^-q, mu^-q}; det(I - P^n) has the same modulus
            det = abs((1 - nu ** (-p)) * (1 - mu ** (-p)))
            total += q * roof * g ** n / det
    return total


# --- zeta closed forms ---------------------------------------------------------------

def cat_zeta1(lam):
    return 1 - cmath.exp(1j * lam)


def cat_log_derivative(lam):
    x = cmath.exp(1j * lam)
    return -1j * x / (1 - x)


def horseshoe_zeta1_series(mu, nu, g, lam, terms=400):
    """``exp(-sum_p (1/p) w_p e^{i lam p})`` with ``w_p = g^p / |det|`` summed far beyond the tail."""
    s = 0j
    for p in range(1, terms + 1):
        w = g ** p / abs((1 - nu ** (-p)) * (1 - mu ** (-p)))
        s += w / p * cmath.exp(1j * lam * p)
    return cmath.exp(-s)


# --- bump function -------------------------------------------------------------------

def bump(x):
    return mpmath.e * mpmath.exp(-1 / (1 - x * x)) if abs(x) < 1 else mpmath.mpf(0)


def bump_fourier_mp(l, d, mu, dps=30):
    """``\\int e^{-i mu t} phi((t - d)/l) dt`` in arbitrary precision."""
    with mpmath.workdps(dps):
        mu = mpmath.mpc(mu)
        f = lambda x: mpmath.exp(-1j * mu * (d + l * x)) * bump(x)
        val = l * mpmath.quad(f, [-1, -0.5, 0, 0.5, 1], maxdegree=10)
        return complex(val)


def poisson_line_sum(r, l, d, max_p=200):
    """Right side of the Poisson identity for one line: ``sum_p r^p phi_{l,d}(p)``."""
    total = 0.0
    for p in range(1, max_p + 1):
        x = (p - d) / l
        if abs(x) < 1:
            total += r ** p * math.exp(1 - 1 / (1 - x * x))
    return total


# --- fixed-point Laplace pairing -----------------------------------------------------

def fixed_point_pole_sum(lam, order=3):
    """``sum_{k1>=1, k2>=0} (-i lam + k1 + 2 k2)^-order`` for generator spectrum {-1, 2}.

    The inner sum is a Hurwitz zeta value; the outer one converges like ``k2^(1-order)``.
    """
    with mpmath.workdps(30):
        a = -1j * mpmath.mpc(lam)
        inner = lambda k2: mpmath.zeta(order, a + 1 + 2 * k2)
        return complex(mpmath.nsum(inner, [0, mpmath.inf]))


def fixed_point_laplace_integral(lam, order=3):
    """``(1/(order-1)!) \\int_0^inf t^(order-1) e^{i lam t} tr(t) dt`` with the flat-trace density.

    Density for generator spectrum {-1, 2}, one stable direction, trivial weight:
    ``-1 / ((1 - e^{t})(1 - e^{-2t}))``.
    """
    with mpmath.workdps(30):
        lam = mpmath.mpc(lam)

        def f(t):
            dens = -1 / ((-mpmath.expm1(t)) * (-mpmath.expm1(-2 * t)))
            return t ** (order - 1) * mpmath.exp(1j * lam * t) * dens

        val = mpmath.quad(f, [0, 1, 5, 20, mpmath.inf]) / mpmath.factorial(order - 1)
        return complex(val)
