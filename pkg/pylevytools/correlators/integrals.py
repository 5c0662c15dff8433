"""
Exact time-ordered integrals over the window [-T, T].

With S = 2T the ordered four-point integral

    I(a, b, c; T) = int_{-T < w < v < u < t < T} exp(-a (t-u) - b (u-v) - c (v-w))

is the divided difference of exp(z S) at the nodes {0, 0, -a, -b, -c}; its Laplace transform
in S is 1 / (p^2 (p+a) (p+b) (p+c)). Three evaluations are used: the Taylor series of the
divided difference (complete homogeneous polynomials) when S max(a, b, c) <= 1, the residue
formula with exact node multiplicities otherwise, and the matrix exponential of the
bidiagonal node matrix when the residue sum cancels.
"""
import math

import numpy as np
from scipy.linalg import expm

from pylevytools import logger
from pylevytools.core.exceptions import CancellationError

TAYLOR_TERMS = 40
TAYLOR_LIMIT = 1.0
CANCELLATION_TOL = 1e-6
PAIR_SERIES_LIMIT = 0.1

_INV_FACTORIALS = [1.0 / math.factorial(j + 4) for j in range(TAYLOR_TERMS)]


def _taylor(scaled):
    """Divided difference of exp at {0, 0, *scaled} for |scaled| <= 1."""
    h = np.zeros(TAYLOR_TERMS)
    h[0] = 1.0
    for y in scaled:
        for j in range(1, TAYLOR_TERMS):
            h[j] += y * h[j - 1]
    return math.fsum(h[j] * _INV_FACTORIALS[j] for j in range(TAYLOR_TERMS))


def _residues(nodes, S):
    """
    Sum of residues of exp(z S) / prod (z - z_i)^m_i. Returns the value and an estimate of
    its relative rounding error.
    """
    distinct = {}
    for z in nodes:
        distinct[z] = distinct.get(z, 0) + 1
    terms = []
    for zj, mj in distinct.items():
        others = [(zi, mi) for zi, mi in distinct.items() if zi != zj]
        g = math.exp(zj * S)
        for zi, mi in others:
            g /= (zj - zi) ** mi
        if mj == 1:
            terms.append(g)
            continue
        l1 = S - math.fsum(mi / (zj - zi) for zi, mi in others)
        if mj == 2:
            terms.append(g * l1)
        elif mj == 3:
            l1_prime = math.fsum(mi / (zj - zi) ** 2 for zi, mi in others)
            terms.append(g * (l1 * l1 + l1_prime) / 2.0)
        else:
            return math.nan, math.inf
    value = math.fsum(terms)
    if value == 0.0 or not math.isfinite(value):
        return value, math.inf
    return value, 1e-16 * math.fsum(abs(t) for t in terms) / abs(value)


def _matrix_exponential(scaled):
    nodes = [0.0, 0.0] + list(scaled)
    m = np.diag(nodes) + np.diag(np.ones(4), 1)
    return float(expm(m)[0, 4])


def ordered_integral(a, b, c, T):
    """I(a, b, c; T) for a, c > 0 and b >= 0."""
    S = 2.0 * T
    scaled = (-a * S, -b * S, -c * S)
    if S * max(a, b, c) <= TAYLOR_LIMIT:
        value = S ** 4 * _taylor(scaled)
    else:
        value, error = _residues((0.0, 0.0, -a, -b, -c), S)
        if error > CANCELLATION_TOL:
            logger.debug(f"Residue formula cancels for E=({a}, {b}, {c}) T={T} (error {error:.2g}), "
                         f"using the matrix exponential")
            value = S ** 4 * _matrix_exponential(scaled)
    if not math.isfinite(value) or value <= 0.0:
        raise CancellationError(f"Ordered integral for E=({a}, {b}, {c}) T={T} evaluated to {value}")
    return value


def pair_integral(e, T):
    """J(E; T) = 2 [S/E - (1 - exp(-E S))/E^2], both orderings of the two-point window integral."""
    S = 2.0 * T
    x = e * S
    if x < PAIR_SERIES_LIMIT:
        # int_0^S (S - g) exp(-E g) dg = S^2 sum (-x)^j / (j + 2)!
        series = math.fsum((-x) ** j / math.factorial(j + 2) for j in range(20))
        return 2.0 * S * S * series
    return 2.0 * (x + math.expm1(-x)) / (e * e)
