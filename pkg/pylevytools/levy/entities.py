"""
Even Levy densities sigma(y) = U(y)^2 of the Poisson-only Levy-Khinchine form

    C(s) = exp{-int [1 - cos(s y)] sigma(y) dy}

Every family is defined through |y| so sigma(-y) == sigma(y) holds exactly.
Near y = 0 a family behaves like |y|^(-singular_exponent); `regular_part`
returns the bounded factor sigma(y) |y|^singular_exponent used by the
algebraic-weight quadratures in `levy.lib`.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from pylevytools import logger
from pylevytools.core.exceptions import DomainError
from pylevytools.core.model import Model
from pylevytools.reconstruct.entities import GridFunction

EVENNESS_TOL = 1e-12


class LevyDensity(Model):
    singular_exponent = 0.0
    support_end = np.inf

    def sigma(self, y):
        raise NotImplementedError

    def regular_part(self, y):
        y = np.abs(np.asarray(y, dtype=float))
        return self.sigma(y) * y ** self.singular_exponent

    def moment_diverges(self, p):
        """True/False when the tail class decides the p-th moment, None when it has to be measured."""
        return None

    def model_function(self, y):
        return np.sqrt(self.sigma(y))

    def __call__(self, y):
        return self.sigma(y)

    def validate_config(self):
        self.check_integrability()

    def check_integrability(self):
        """int y^2/(1+y^2) sigma(y) dy has to be finite."""
        beta = self.singular_exponent
        head, _ = integrate.quad(lambda y: self.regular_part(y) / (1.0 + y * y), 0.0, 1.0,
                                 weight="alg", wvar=(2.0 - beta, 0.0), limit=200)
        tail, _ = integrate.quad(lambda y: self.sigma(y) * y * y / (1.0 + y * y), 1.0, self.support_end, limit=200)
        total = 2.0 * (head + tail)
        if not math.isfinite(total):
            raise DomainError(f"{self!r} violates the integrability condition")
        logger.debug(f"{self!r}: int y^2/(1+y^2) sigma dy = {total}")
        return total


def _abs(y):
    return np.abs(np.asarray(y, dtype=float))


class CauchyTail(LevyDensity):
    """sigma(y) = a / (pi y^2); C(s) = exp(-a |s|)."""
    singular_exponent = 2.0

    def __init__(self, a=1.0):
        super().__init__("cauchy")
        self.a = float(a)

    def parameters(self):
        return {"a": self.a}

    def sigma(self, y):
        y = _abs(y)
        with np.errstate(divide="ignore"):
            return self.a / (np.pi * y * y)

    def regular_part(self, y):
        return np.full_like(_abs(y), self.a / np.pi)

    def moment_diverges(self, p):
        return p >= 1

    def validate_config(self):
        if not self.a > 0:
            raise DomainError(f"CauchyTail scale a has to be positive, got {self.a}")
        super().validate_config()


class BesselK1(LevyDensity):
    """sigma(y) = b rho K1(rho |y|) / (pi |y|); C(s) = exp(-b sqrt(s^2 + rho^2) + b rho)."""
    singular_exponent = 2.0

    def __init__(self, b=1.0, rho=1.0):
        super().__init__("bessel")
        self.b = float(b)
        self.rho = float(rho)

    def parameters(self):
        return {"b": self.b, "rho": self.rho}

    def sigma(self, y):
        y = _abs(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.b * self.rho * special.k1(self.rho * y) / (np.pi * y)

    def regular_part(self, y):
        z = self.rho * _abs(y)
        with np.errstate(invalid="ignore"):
            # z K1(z) -> 1 as z -> 0
            zk1 = np.where(z > 0, z * special.k1(np.where(z > 0, z, 1.0)), 1.0)
        return self.b * zk1 / np.pi

    def moment_diverges(self, p):
        return False

    def validate_config(self):
        if not (self.b > 0 and self.rho > 0):
            raise DomainError(f"BesselK1 needs b > 0 and rho > 0, got b={self.b} rho={self.rho}")
        super().validate_config()


class AlphaFamily(LevyDensity):
    """sigma(y) = exp(-y^2) / (pi |y|^alpha) for 2 <= alpha < 3."""

    def __init__(self, alpha=2.5):
        super().__init__("alpha")
        self.alpha = float(alpha)

    @property
    def singular_exponent(self):
        return self.alpha

    def parameters(self):
        return {"alpha": self.alpha}

    def sigma(self, y):
        y = _abs(y)
        with np.errstate(divide="ignore"):
            return np.exp(-y * y) / (np.pi * y ** self.alpha)

    def regular_part(self, y):
        y = _abs(y)
        return np.exp(-y * y) / np.pi

    def moment_diverges(self, p):
        return False

    def validate_config(self):
        if not 2.0 <= self.alpha < 3.0:
            raise DomainError(f"AlphaFamily exponent has to lie in [2, 3), got {self.alpha}")
        super().validate_config()


def _unit_k1_basic(y):
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(y > 0, y * special.k1(np.where(y > 0, y, 1.0)), 1.0)


# named basic functions F for configuration files; "one" and "k1" give the Cauchy and Bessel cases
BASIC_FUNCTIONS = {
    "one": lambda y: np.ones_like(np.asarray(y, dtype=float)),
    "k1": _unit_k1_basic,
    "gauss": lambda y: np.exp(-np.asarray(y, dtype=float) ** 2),
}


class BasicFunctionFamily(LevyDensity):
    """
    sigma(y) = b F(|y|) / (pi y^2) for a basic function F with F(0) = 1, F >= 0 and
    int F/(1+y^2) dy finite. CauchyTail is F = 1, BesselK1 is F(y) = rho y K1(rho y).
    Smoothness of F is not checked.
    """
    singular_exponent = 2.0

    def __init__(self, basic=None, b=1.0, name=None):
        super().__init__("basic")
        assert basic is not None, "basic function cannot be None"
        if isinstance(basic, str):
            if basic not in BASIC_FUNCTIONS:
                raise DomainError(f"Unknown basic function {basic}. Available: " + str(list(BASIC_FUNCTIONS)))
            name = name or basic
            basic = BASIC_FUNCTIONS[basic]
        name = name or "custom"
        self.basic = basic
        self.b = float(b)
        self.name = name

    def parameters(self):
        return {"b": self.b, "basic": self.name}

    def sigma(self, y):
        y = _abs(y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.b * self.basic(y) / (np.pi * y * y)

    def regular_part(self, y):
        return self.b * np.asarray(self.basic(_abs(y)), dtype=float) / np.pi

    def validate_config(self):
        if not self.b > 0:
            raise DomainError(f"Basic function family needs b > 0, got {self.b}")
        if abs(float(self.basic(np.array([0.0]))[0]) - 1.0) > 1e-12:
            raise DomainError("Basic function has to satisfy F(0) = 1")
        grid = np.linspace(0.0, 100.0, 2001)
        if np.any(np.asarray(self.basic(grid)) < 0):
            raise DomainError("Basic function has to be nonnegative")
        super().validate_config()


class Tabulated(LevyDensity):
    """
    sigma sampled on a symmetric grid, interpolated by monotone cubic segments on
    y >= 0 and extended by zero beyond the table.
    """

    def __init__(self, grid: GridFunction, source=None):
        super().__init__("tabulated")
        self.grid = grid
        self.source = source
        half = grid.n // 2
        self.support_end = float(grid.x[-1])
        self._interpolator = PchipInterpolator(grid.x[half:], grid.values[half:], extrapolate=False)

    @classmethod
    def from_csv(cls, table):
        return cls(GridFunction.from_csv(table), source=str(table))

    def parameters(self):
        return {"n": self.grid.n, "dx": self.grid.dx, "source": self.source}

    def sigma(self, y):
        values = self._interpolator(_abs(y))
        return np.nan_to_num(values, nan=0.0)

    def validate_config(self):
        if not self.grid.is_even(EVENNESS_TOL):
            raise DomainError("Tabulated Levy density is not even within " + str(EVENNESS_TOL))
        if np.any(self.grid.values < 0):
            raise DomainError("Tabulated Levy density has negative values")
        super().validate_config()


@dataclass(frozen=True, eq=False)
class CharacteristicSamples:
    """
    Samples of an even characteristic function C at nonnegative s, evaluated as C^r.
    """
    s_values: np.ndarray
    c_values: np.ndarray
    r: float = 1.0

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=float)
        c = np.asarray(self.c_values, dtype=float)
        if s.shape != c.shape or s.ndim != 1:
            raise ValueError("s_values and c_values have to be 1-d arrays of equal length")
        if np.any(s < 0) or np.any(np.diff(s) <= 0):
            raise ValueError("s_values have to be nonnegative and strictly ascending")
        if np.any(c < 0) or np.any(c > 1.0 + 1e-12):
            raise ValueError("characteristic function samples have to lie in [0, 1]")
        if not self.r > 0:
            raise ValueError(f"power r has to be positive, got {self.r}")
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "c_values", c)

    @classmethod
    def from_function(cls, fn, s_values, r=1.0):
        s = np.asarray(s_values, dtype=float)
        return cls(s_values=s, c_values=np.asarray(fn(s), dtype=float), r=r)

    @staticmethod
    def pairwise_differences(points):
        points = np.asarray(points, dtype=float)
        return np.unique(np.abs(points[:, None] - points[None, :]))

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        idx = np.searchsorted(self.s_values, s)
        idx = np.clip(idx, 0, len(self.s_values) - 1)
        # nearest of the two neighbours
        left = np.clip(idx - 1, 0, len(self.s_values) - 1)
        pick = np.where(np.abs(self.s_values[left] - s) < np.abs(self.s_values[idx] - s), left, idx)
        if np.any(np.abs(self.s_values[pick] - s) > 1e-12 * np.maximum(1.0, s)):
            raise ValueError("characteristic samples are not available at all requested points")
        return self.c_values[pick] ** self.r
