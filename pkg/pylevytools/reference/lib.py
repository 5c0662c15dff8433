import math

import numpy as np

from pylevytools.core.exceptions import DomainError
from pylevytools.schrodinger.entities import MatrixElements

EULER_GAMMA = 0.5772156649015329
SERIES_LIMIT = 2.0
SERIES_TERMS = 40
CF_MAX_ITERATIONS = 10000
CF_EPS = 1e-16


def _k1_series(x):
    """
    K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
    """
    z = x * x / 4.0
    term = 1.0
    digamma_k1 = -EULER_GAMMA
    i1_terms, psi_terms = [], []
    for k in range(SERIES_TERMS):
        if k > 0:
            term *= z / (k * (k + 1))
            digamma_k1 += 1.0 / k
        digamma_k2 = digamma_k1 + 1.0 / (k + 1)
        i1_terms.append(term)
        psi_terms.append((digamma_k1 + digamma_k2) * term)
        if term < 1e-18:
            break
    i1 = x / 2.0 * math.fsum(i1_terms)
    return 1.0 / x + math.log(x / 2.0) * i1 - x / 4.0 * math.fsum(psi_terms)


def _k1_continued_fraction(x):
    """
    Steed's evaluation of the second continued fraction for K0 and K1 (order mu = 0):
    K0 = sqrt(pi/2x) exp(-x) / s, K1 = K0 (x + 1/2 - h) / x.
    """
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, CF_MAX_ITERATIONS):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < CF_EPS:
            break
    else:
        raise DomainError(f"K1 continued fraction did not converge at x={x}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    return k0 * (x + 0.5 - h) / x


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1, for x > 0 (scalar or array)."""
    if np.ndim(x) > 0:
        return np.array([bessel_k1(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
    x = float(x)
    if not x > 0:
        raise DomainError(f"K1 is defined for x > 0, got {x}")
    if x < SERIES_LIMIT:
        return _k1_series(x)
    return _k1_continued_fraction(x)


def ho_exact(omega, K):
    """E_n = n omega and Q_{n,n+1} = sqrt((n+1)/(2 omega)) for the lowest K oscillator states."""
    if K < 2:
        raise ValueError(f"oscillator data needs K >= 2, got {K}")
    if not omega > 0:
        raise ValueError(f"oscillator frequency has to be positive, got {omega}")
    n = np.arange(K - 1)
    off = np.sqrt((n + 1) / (2.0 * omega))
    q = np.diag(off, 1) + np.diag(off, -1)
    return MatrixElements(q=q, energies=np.arange(K) * float(omega))


def closed_forms(model):
    return model.closed_forms()
