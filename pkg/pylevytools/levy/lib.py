import math

import numpy as np
from scipy import integrate

from pylevytools import logger
from pylevytools.core.env_manager import get_settings
from pylevytools.core.exceptions import QuadratureError, SpectrumError
from pylevytools.levy.entities import LevyDensity, CharacteristicSamples

MAX_BOCHNER_POINTS = 16
# a tabulated tail whose truncated moment still moves by more than this is reported as divergent
MOMENT_DIVERGENCE_CHANGE = 0.1


def _tail_cut(sigma: LevyDensity, start, settings):
    """Smallest Y = start * 2^k with int_Y^inf sigma < abs_tol, capped at the tail cut-off."""
    if math.isfinite(sigma.support_end):
        return max(start, float(sigma.support_end)), 0.0
    y_cut = start
    while True:
        mass, _ = integrate.quad(sigma.sigma, y_cut, np.inf, limit=settings.quad_limit)
        if mass < settings.abs_tol or y_cut >= settings.tail_cutoff:
            return y_cut, mass
        y_cut = min(2.0 * y_cut, settings.tail_cutoff)


def _series_moments(sigma: LevyDensity, eps, settings):
    beta = sigma.singular_exponent
    moments = []
    for power in (2.0, 4.0):
        value, _ = integrate.quad(sigma.regular_part, 0.0, eps, weight="alg", wvar=(power - beta, 0.0),
                                  epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.quad_limit)
        moments.append(value)
    return moments


def levy_exponent_grid(sigma: LevyDensity, s_values):
    """
    psi(s) = int [1 - cos(s y)] sigma(y) dy for all s at once.

    Integrates over y > 0 and doubles. (0, eps) uses the two term series of 1 - cos,
    (eps, Y) a vector valued adaptive Gauss-Kronrod rule, beyond Y the remaining mass
    of sigma minus its Fourier integral.
    """
    settings = get_settings()
    s_in = np.asarray(s_values, dtype=float)
    s = np.abs(s_in).ravel()
    psi = np.zeros_like(s)
    active = s > 0
    if not np.any(active):
        return psi.reshape(s_in.shape)
    s_act = s[active]
    s_top = float(np.max(s_act))

    eps = min(settings.series_eps / s_top, 1.0)
    m2, m4 = _series_moments(sigma, eps, settings)
    series = s_act ** 2 / 2.0 * m2 - s_act ** 4 / 24.0 * m4

    y_cut, tail_mass = _tail_cut(sigma, max(1.0, 2.0 * eps), settings)
    points = [p for p in np.geomspace(eps, 1.0, 9)[1:-1] if eps < p < y_cut]

    def integrand(y):
        return sigma.sigma(y) * 2.0 * np.sin(s_act * y / 2.0) ** 2

    middle, error, info = integrate.quad_vec(integrand, eps, y_cut, epsabs=settings.abs_tol,
                                             epsrel=settings.rel_tol, norm="max", limit=settings.quad_limit,
                                             points=points or None, full_output=True)
    if not info.success:
        raise QuadratureError(f"Levy exponent quadrature of {sigma!r} did not converge on ({eps}, {y_cut}): "
                              + str(info.message), partial=2.0 * (series + middle), error_estimate=error)
    logger.debug(f"psi {sigma!r}: eps={eps:.3g} Y={y_cut} intervals={info.intervals.shape[0]} err={error:.3g}")

    tail = np.zeros_like(s_act)
    if tail_mass >= settings.abs_tol:
        for i, si in enumerate(s_act):
            cos_part, _ = integrate.quad(sigma.sigma, y_cut, np.inf, weight="cos", wvar=si,
                                         epsabs=1e-11, limlst=100, limit=settings.quad_limit)
            tail[i] = tail_mass - cos_part

    values = [2.0 * math.fsum((a, b, c)) for a, b, c in zip(series, middle, tail)]
    psi[active] = values
    return psi.reshape(s_in.shape)


def levy_exponent(sigma: LevyDensity, s):
    if not math.isfinite(s):
        raise ValueError(f"Levy exponent needs a finite argument, got {s}")
    return float(levy_exponent_grid(sigma, np.array([s]))[0])


def characteristic(sigma: LevyDensity, s, r=1.0):
    """C^r(s) = exp(-r psi(s)); accepts a scalar or an array of s."""
    if not r > 0:
        raise ValueError(f"power r has to be positive, got {r}")
    if np.ndim(s) == 0:
        return math.exp(-r * levy_exponent(sigma, float(s)))
    return np.exp(-r * levy_exponent_grid(sigma, s))


def characteristic_samples(sigma: LevyDensity, s_values, r=1.0):
    s = np.unique(np.abs(np.asarray(s_values, dtype=float)))
    return CharacteristicSamples(s_values=s, c_values=np.exp(-levy_exponent_grid(sigma, s)), r=r)


def pairwise_samples(sigma: LevyDensity, points, r=1.0):
    """Characteristic samples at all pairwise differences of a Bochner point set."""
    return characteristic_samples(sigma, CharacteristicSamples.pairwise_differences(points), r=r)


def _moment(sigma: LevyDensity, p, y_end, settings):
    beta = sigma.singular_exponent
    head_end = min(1.0, y_end)
    head, _ = integrate.quad(sigma.regular_part, 0.0, head_end, weight="alg", wvar=(2 * p - beta, 0.0),
                             epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.quad_limit)
    tail = 0.0
    if y_end > head_end:
        tail, _ = integrate.quad(lambda y: y ** (2 * p) * sigma.sigma(y), head_end, y_end,
                                 epsabs=settings.abs_tol, epsrel=settings.rel_tol, limit=settings.quad_limit)
    return 2.0 * math.fsum((head, tail))


def sigma_moment(sigma: LevyDensity, p):
    """
    Truncated moment <X^2p>^T = int y^2p sigma(y) dy, or math.inf when it diverges.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"moment order has to be a positive integer, got {p}")
    p = int(p)
    settings = get_settings()
    diverges = sigma.moment_diverges(p)
    if diverges:
        return math.inf
    if diverges is not None:
        return _moment(sigma, p, sigma.support_end, settings)

    far_end = min(2.0 * settings.tail_cutoff, sigma.support_end)
    near = _moment(sigma, p, far_end / 2.0, settings)
    far = _moment(sigma, p, far_end, settings)
    if abs(far - near) > MOMENT_DIVERGENCE_CHANGE * abs(far):
        logger.warning(f"Moment p={p} of {sigma!r} changes from {near} to {far} when doubling the cut-off, "
                       f"reported as divergent")
        return math.inf
    return far


def bochner_check(c: CharacteristicSamples, points):
    """Smallest eigenvalue of M_ij = C^r(x_i - x_j)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 1 or len(points) == 0:
        raise ValueError("points have to be a non empty list of points")
    if len(points) > MAX_BOCHNER_POINTS:
        raise ValueError(f"{len(points)} points given, at most {MAX_BOCHNER_POINTS} allowed")
    if len(np.unique(points)) != len(points):
        raise ValueError("points have to be distinct")
    matrix = c(points[:, None] - points[None, :])
    matrix = (matrix + matrix.T) / 2.0
    try:
        eigenvalues = np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as e:
        raise SpectrumError(f"Bochner matrix eigensolve failed for points {points.tolist()}: {e}")
    return float(eigenvalues[0])
