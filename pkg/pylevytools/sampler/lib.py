import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from pylevytools import logger
from pylevytools.core.exceptions import StiffnessError, EnsembleError, DomainError
from pylevytools.correlators.lib import chi2_scale
from pylevytools.reconstruct.entities import GridFunction, MIN_GRID_POINTS
from pylevytools.reconstruct.lib import retained_mask
from pylevytools.sampler.entities import PathEnsemble
from pylevytools.tools.misc import batch

BLOCK_SIZE = 4096
STIFFNESS_LIMIT = 0.5
MIN_PATHS = 100


def drift(phi0: GridFunction):
    """
    b = phi0'/phi0 = d log(phi0)/dx by central differences on the retained domain, linear
    extrapolation outside. The mask of the result marks the domain between the walls.
    """
    mask = retained_mask(phi0)
    idx = np.flatnonzero(mask)
    if len(idx) < MIN_GRID_POINTS:
        raise DomainError(f"Retained domain has {len(idx)} points, at least {MIN_GRID_POINTS} needed")
    i0, i1 = int(idx[0]), int(idx[-1]) + 1
    x, dx = phi0.x, phi0.dx
    inner = np.gradient(np.log(phi0.values[i0:i1]), dx, edge_order=2)
    b = np.empty(phi0.n)
    b[i0:i1] = inner
    left_slope = (inner[1] - inner[0]) / dx
    right_slope = (inner[-1] - inner[-2]) / dx
    b[:i0] = inner[0] + (x[:i0] - x[i0]) * left_slope
    b[i1:] = inner[-1] + (x[i1:] - x[i1 - 1]) * right_slope
    b = (b - b[::-1]) / 2.0
    return phi0.with_values(b, mask=mask)


class _Stepper:
    def __init__(self, b: GridFunction, dt):
        i0, i1 = b.retained_bounds()
        self.x = b.x[i0:i1]
        self.b = b.values[i0:i1]
        self.wall = float(self.x[-1])
        self.dt = dt
        self.sqrt_dt = math.sqrt(dt)

    def __call__(self, X, rng):
        X = X + np.interp(X, self.x, self.b) * self.dt + self.sqrt_dt * rng.standard_normal(len(X))
        X = np.where(X > self.wall, 2.0 * self.wall - X, X)
        X = np.where(X < -self.wall, -2.0 * self.wall - X, X)
        return np.clip(X, -self.wall, self.wall)


def _steps(values, dt, n_steps, what):
    steps = {}
    for value in values:
        n = int(round(value / dt))
        if n < 1 or n > n_steps:
            logger.warning(f"{what} {value} does not fit in {n_steps} steps of {dt}, skipped")
            continue
        steps[float(value)] = n
    return steps


def simulate(b: GridFunction, density: GridFunction, dt, n_steps, n_paths, seed,
             windows=(), lags=(), burn_in=0, block_size=BLOCK_SIZE):
    """
    Euler-Maruyama paths of dX = b(X) dt + dW with reflecting walls at the retained domain,
    started from the density by inverse CDF sampling. Each block of paths draws from its own
    Philox stream keyed by (seed, block), so results do not depend on how blocks are scheduled.
    """
    if n_paths < 1 or n_steps < 0 or not dt > 0:
        raise ValueError(f"invalid sampler settings n_paths={n_paths} n_steps={n_steps} dt={dt}")
    if density.n != b.n or density.dx != b.dx:
        raise ValueError("drift and density have to live on the same grid")
    stepper = _Stepper(b, dt)
    stiffness = dt * float(np.max(np.abs(stepper.b)))
    if stiffness >= STIFFNESS_LIMIT:
        raise StiffnessError(f"dt * max|b| = {stiffness:.3g} >= {STIFFNESS_LIMIT}, use dt < "
                             f"{STIFFNESS_LIMIT / np.max(np.abs(stepper.b)):.3g}")

    i0, i1 = b.retained_bounds()
    cdf = cumulative_trapezoid(density.values[i0:i1], stepper.x, initial=0.0)
    cdf /= cdf[-1]

    window_steps = _steps([2.0 * T for T in windows], dt, n_steps, "Window 2T =")
    lag_steps = _steps(lags, dt, n_steps, "Lag")
    integrals = {T: np.empty(n_paths) for T in windows if 2.0 * T in window_steps}
    products = {tau: np.empty(n_paths) for tau in lag_steps}
    initial, final, averages = np.empty(n_paths), np.empty(n_paths), np.empty(n_paths)

    for block, paths in enumerate(batch(range(n_paths), block_size)):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))
        sl = slice(paths[0], paths[-1] + 1)
        X = np.interp(rng.random(len(paths)), cdf, stepper.x)
        for _ in range(burn_in):
            X = stepper(X, rng)
        x0 = X.copy()
        w = {T: 0.5 * dt * X for T in integrals}
        total = X.copy()
        for step in range(1, n_steps + 1):
            X = stepper(X, rng)
            total += X
            for T in integrals:
                n = window_steps[2.0 * T]
                if step < n:
                    w[T] += dt * X
                elif step == n:
                    w[T] += 0.5 * dt * X
            for tau, n in lag_steps.items():
                if step == n:
                    products[tau][sl] = x0 * X
        for T in integrals:
            integrals[T][sl] = w[T]
        initial[sl], final[sl] = x0, X
        averages[sl] = total / (n_steps + 1)

    logger.info(f"Simulated {n_paths} paths of {n_steps} steps (dt={dt}, seed={seed})")
    return PathEnsemble(n_paths=n_paths, n_steps=n_steps, dt=dt, seed=seed, initial=initial, final=final,
                        time_averages=averages, window_integrals=integrals, lag_products=products,
                        burn_in=burn_in)


def jackknife(estimator, *columns):
    """
    Leave-one-out jackknife of an estimator of sample means: estimator(mean_1, mean_2, ...).
    Returns the full sample estimate and its standard error.
    """
    n = len(columns[0])
    sums = [np.sum(c) for c in columns]
    full = estimator(*[s / n for s in sums])
    partial = estimator(*[(s - c) / (n - 1) for s, c in zip(sums, columns)])
    error = math.sqrt((n - 1) / n * np.sum((partial - np.mean(partial)) ** 2))
    return float(full), error


def _require_paths(ensemble: PathEnsemble):
    if ensemble.n_paths < MIN_PATHS:
        raise EnsembleError(f"{ensemble.n_paths} paths give no meaningful error bar, at least {MIN_PATHS} needed")


def estimate_chi2(ensemble: PathEnsemble, T, energy_scale=None):
    """(1+2T)^3/(2T)^4 [m4(W) - 3 m2(W)^2] with a jackknife standard error."""
    _require_paths(ensemble)
    w = ensemble.window(T)
    scale = chi2_scale(T, energy_scale)
    estimate, error = jackknife(lambda m2, m4: m4 - 3.0 * m2 * m2, w * w, w ** 4)
    return scale * estimate, scale * error


def estimate_autocovariance(ensemble: PathEnsemble, tau):
    _require_paths(ensemble)
    products = ensemble.lag(tau)
    return float(np.mean(products)), float(np.std(products, ddof=1) / math.sqrt(len(products)))


def estimate_variance(ensemble: PathEnsemble):
    _require_paths(ensemble)
    squares = ensemble.final ** 2
    return float(np.mean(squares)), float(np.std(squares, ddof=1) / math.sqrt(len(squares)))


def time_average(ensemble: PathEnsemble):
    _require_paths(ensemble)
    a = ensemble.time_averages
    return float(np.mean(a)), float(np.std(a, ddof=1) / math.sqrt(len(a)))
