import math

import numpy as np
from scipy.integrate import trapezoid

from pylevytools import logger
from pylevytools.core.env_manager import get_settings
from pylevytools.core.exceptions import InversionError, GroundStateError, DomainError
from pylevytools.levy.entities import LevyDensity
from pylevytools.levy.lib import levy_exponent_grid
from pylevytools.reconstruct.entities import GridSpec, GridFunction, MIN_GRID_POINTS

S_MAX_LIMIT = 4096.0
MASS_TOL = 1e-6


def choose_s_max(sigma: LevyDensity, s_max=None, power=1.0):
    """
    Cut-off of the cosine transform: C^power(s_max) < c_tail. Doubles from s_max_start
    unless an explicit s_max is given, which is then only checked.
    """
    settings = get_settings()
    log_tail = -math.log(settings.c_tail)
    if s_max is not None:
        psi = float(levy_exponent_grid(sigma, np.array([s_max]))[0])
        if not power * psi > log_tail:
            raise InversionError(f"C(s_max={s_max}) = {math.exp(-power * psi):.3g} is not below "
                                 f"{settings.c_tail}, raise s_max")
        return float(s_max)

    s_max = settings.s_max_start
    while s_max <= S_MAX_LIMIT:
        s = np.linspace(0.0, s_max, 33)
        psi = levy_exponent_grid(sigma, s)
        if np.any(np.diff(psi) < 0):
            logger.warning(f"psi of {sigma!r} is not monotone on [0, {s_max}]")
        if power * psi[-1] > log_tail:
            logger.debug(f"s_max={s_max} psi(s_max)={psi[-1]}")
            return float(s_max)
        s_max *= 2.0
    raise InversionError(f"C({sigma!r}) does not fall below {settings.c_tail} up to s={S_MAX_LIMIT}")


def simpson_weights(n_intervals, h):
    w = np.full(n_intervals + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def density_from_characteristic(sigma: LevyDensity, grid: GridSpec = GridSpec(), s_max=None, power=1.0):
    """
    rho(x) = (1/pi) int_0^s_max cos(s x) C^power(s) ds on the grid by composite Simpson.
    power = 1/N gives the density of one of N i.i.d. summands.
    """
    settings = get_settings()
    s_max = choose_s_max(sigma, s_max, power)
    ds = math.pi / (8.0 * grid.L)
    n_intervals = int(math.ceil(s_max / ds))
    n_intervals += n_intervals % 2
    s = np.linspace(0.0, s_max, n_intervals + 1)
    c = np.exp(-power * levy_exponent_grid(sigma, s))
    weighted = simpson_weights(n_intervals, s[1] - s[0]) * c

    m = (grid.n - 1) // 2
    x_half = grid.x[m:]
    rho_half = np.cos(np.outer(x_half, s)) @ weighted / math.pi
    rho = np.concatenate([rho_half[:0:-1], rho_half])

    clip_level = settings.clip_tol * np.max(rho)
    if np.min(rho) < -clip_level:
        i = int(np.argmin(rho))
        raise InversionError(f"Negative lobe rho({grid.x[i]:.6g}) = {rho[i]:.3g} beyond clip level {clip_level:.3g}")
    rho[rho < 0] = 0.0

    result = GridFunction.from_spec(grid, rho)
    mass = result.integral()
    if abs(mass - 1.0) > MASS_TOL:
        logger.warning(f"Density of {sigma!r} has mass {mass:.8f} on [-{grid.L}, {grid.L}]")
    logger.info(f"Inverted characteristic function of {sigma!r}: s_max={s_max}, {n_intervals} intervals, "
                f"mass on grid {mass:.10f}")
    return result


def ground_state(rho: GridFunction):
    """phi0 = sqrt(rho), renormalized so that the trapezoidal int phi0^2 dx = 1."""
    settings = get_settings()
    clip_level = settings.clip_tol * np.max(rho.values)
    if np.min(rho.values) < -clip_level:
        raise GroundStateError(f"Density has negative values down to {np.min(rho.values):.3g}, "
                               f"beyond clip level {clip_level:.3g}")
    phi0 = np.sqrt(np.maximum(rho.values, 0.0))
    norm = trapezoid(phi0 * phi0, dx=rho.dx)
    if not norm > 0:
        raise GroundStateError("Density vanishes on the grid")
    return rho.with_values(phi0 / math.sqrt(norm), mask=rho.mask)


def second_difference(values, dx):
    d2 = np.zeros_like(values)
    d2[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / (dx * dx)
    return d2


def _central_block(mask):
    """Largest block [i0, i1) symmetric about the centre in which mask holds everywhere."""
    n = len(mask)
    m = (n - 1) // 2
    if not mask[m]:
        return m, m
    bad = np.flatnonzero(~mask[m:])
    half = int(bad[0]) if len(bad) else n - m
    return m - half + 1, m + half


def retained_mask(phi0: GridFunction):
    settings = get_settings()
    phi = phi0.values
    top = np.max(phi)
    keep = (phi >= settings.domain_floor * top) & (phi * phi > settings.clip_tol * top * top)
    keep[0] = keep[-1] = False
    keep &= keep[::-1]
    i0, i1 = _central_block(keep)
    mask = np.zeros(len(phi), dtype=bool)
    mask[i0:i1] = True
    return mask


def potential(phi0: GridFunction):
    """
    V = phi0''/(2 phi0) by central differences, symmetrized, restricted to the
    retained domain (the mask of the returned GridFunction).
    """
    mask = retained_mask(phi0)
    retained = int(np.count_nonzero(mask))
    if retained < MIN_GRID_POINTS:
        raise DomainError(f"Retained domain has {retained} points, at least {MIN_GRID_POINTS} needed")
    phi = phi0.values
    v = np.zeros_like(phi)
    v[mask] = second_difference(phi, phi0.dx)[mask] / (2.0 * phi[mask])
    v = (v + v[::-1]) / 2.0
    x = phi0.x[mask]
    logger.info(f"Potential on retained domain [{x[0]:.6g}, {x[-1]:.6g}] ({retained} points)")
    return phi0.with_values(v, mask=mask)


def zero_mode_residual(phi0: GridFunction, v: GridFunction):
    """||(-1/2 D2 + V) phi0|| / ||phi0|| over the interior of the retained domain."""
    i0, i1 = v.retained_bounds()
    phi = phi0.values
    residual = -0.5 * second_difference(phi, phi0.dx) + v.values * phi
    inner = slice(i0 + 1, i1 - 1)
    return float(np.linalg.norm(residual[inner]) / np.linalg.norm(phi[i0:i1]))


def tail_decay_exponent(phi0: GridFunction, v: GridFunction = None):
    """
    kappa of phi0 ~ exp(-c |x|^kappa), fitted by log(-log(phi0/max)) against log|x| on the
    outer half of the retained domain. Reported as evidence only, nan if the tail is too short.
    """
    mask = v.mask if v is not None and v.mask is not None else retained_mask(phi0)
    x = phi0.x
    ratio = phi0.values / np.max(phi0.values)
    outer = mask & (x > 0) & (ratio < 0.5)
    outer &= x >= 0.5 * np.max(x[mask])
    if np.count_nonzero(outer) < 3:
        return math.nan
    slope, _ = np.polyfit(np.log(x[outer]), np.log(-np.log(ratio[outer])), 1)
    return float(slope)
