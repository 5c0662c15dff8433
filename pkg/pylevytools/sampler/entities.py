import math
from dataclasses import dataclass, field

import numpy as np

from pylevytools.core.exceptions import EnsembleError


def _lookup(table, key, what):
    for k, v in table.items():
        if math.isclose(k, key, rel_tol=1e-12, abs_tol=1e-15):
            return v
    raise EnsembleError(f"{what} {key} was not recorded; available: {sorted(table)}")


@dataclass
class PathEnsemble:
    """
    Streaming statistics of n_paths ground state diffusion paths: window integrals
    int_0^{2T} X dt per requested T, products X(0) X(tau) per requested lag, and per path
    time averages. Paths themselves are not kept.
    """
    n_paths: int
    n_steps: int
    dt: float
    seed: int
    initial: np.ndarray
    final: np.ndarray
    time_averages: np.ndarray
    window_integrals: dict = field(default_factory=dict)
    lag_products: dict = field(default_factory=dict)
    burn_in: int = 0

    @property
    def duration(self):
        return self.n_steps * self.dt

    def window(self, T):
        if 2.0 * T > self.duration + 1e-12 * self.dt:
            raise EnsembleError(f"Window 2T = {2.0 * T} exceeds the path length {self.duration}")
        return _lookup(self.window_integrals, T, "Window T =")

    def lag(self, tau):
        if tau > self.duration + 1e-12 * self.dt:
            raise EnsembleError(f"Lag {tau} exceeds the path length {self.duration}")
        return _lookup(self.lag_products, tau, "Lag")

    def describe(self):
        return {
            "n_paths": self.n_paths,
            "n_steps": self.n_steps,
            "dt": self.dt,
            "seed": self.seed,
            "burn_in": self.burn_in,
            "windows": sorted(self.window_integrals),
            "lags": sorted(self.lag_products),
        }
