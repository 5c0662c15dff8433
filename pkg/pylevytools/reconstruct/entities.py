from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from pylevytools.core.exceptions import DomainError
from pylevytools.data.tools import write_csv, read_csv

MIN_GRID_POINTS = 9


@dataclass(frozen=True)
class GridSpec:
    """Symmetric uniform grid x in [-L, L] with n (odd) points."""
    L: float = 12.0
    n: int = 2001

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"Grid half-width L has to be positive, got {self.L}")
        if self.n < MIN_GRID_POINTS or self.n % 2 == 0:
            raise ValueError(f"Grid size n has to be odd and >= {MIN_GRID_POINTS}, got {self.n}")

    @property
    def dx(self):
        return 2.0 * self.L / (self.n - 1)

    @property
    def x(self):
        return _symmetric_axis(self.n, self.dx)

    def refined(self, factor):
        return GridSpec(L=self.L, n=(self.n - 1) * factor + 1)


def _symmetric_axis(n, dx):
    # integer offsets keep x[i] == -x[n-1-i] exactly
    return (np.arange(n) - (n - 1) // 2) * dx


@dataclass(frozen=True, eq=False)
class GridFunction:
    x_min: float
    dx: float
    values: np.ndarray
    mask: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        n = len(values)
        if n < MIN_GRID_POINTS or n % 2 == 0:
            raise DomainError(f"GridFunction needs an odd number >= {MIN_GRID_POINTS} of points, got {n}")
        if not self.dx > 0:
            raise DomainError(f"Grid spacing has to be positive, got {self.dx}")
        if abs(self.x_min + (n - 1) / 2 * self.dx) > 1e-9 * self.dx * n:
            raise DomainError("Grid is not symmetric about 0: x_min=" + str(self.x_min))
        if not np.all(np.isfinite(values)):
            raise DomainError("GridFunction values have to be finite")
        if self.mask is not None:
            mask = np.array(self.mask, dtype=bool)
            if mask.shape != values.shape:
                raise DomainError("Mask shape does not match values")
            mask.setflags(write=False)
            object.__setattr__(self, "mask", mask)

    @classmethod
    def from_spec(cls, spec, values, mask=None):
        return cls(x_min=-(spec.n - 1) / 2 * spec.dx, dx=spec.dx, values=values, mask=mask)

    @classmethod
    def from_function(cls, spec, fn):
        return cls.from_spec(spec, fn(spec.x))

    @property
    def n(self):
        return len(self.values)

    @property
    def x(self):
        return _symmetric_axis(self.n, self.dx)

    @property
    def spec(self):
        return GridSpec(L=(self.n - 1) / 2 * self.dx, n=self.n)

    def with_values(self, values, mask=None):
        return GridFunction(x_min=self.x_min, dx=self.dx, values=values, mask=mask)

    def symmetry_error(self, parity=1):
        return float(np.max(np.abs(self.values - parity * self.values[::-1])))

    def is_even(self, tol=0.0):
        return self.symmetry_error() <= tol

    def integral(self):
        return float(trapezoid(self.values, dx=self.dx))

    def retained_bounds(self):
        """First and one-past-last index of the retained (unmasked) block."""
        if self.mask is None:
            return 0, self.n
        idx = np.flatnonzero(self.mask)
        if len(idx) == 0:
            return 0, 0
        return int(idx[0]), int(idx[-1]) + 1

    def retained(self):
        i0, i1 = self.retained_bounds()
        if i1 - i0 < MIN_GRID_POINTS:
            raise DomainError(f"Retained domain has {i1 - i0} points, at least {MIN_GRID_POINTS} needed")
        if i0 + i1 != self.n:
            raise DomainError("Retained domain is not symmetric about 0")
        m = i1 - i0
        return GridFunction(x_min=-(m - 1) / 2 * self.dx, dx=self.dx, values=self.values[i0:i1])

    def to_frame(self):
        return pd.DataFrame({"x": self.x, "value": self.values})

    def to_csv(self, output_file):
        return write_csv(self.to_frame(), output_file)

    @classmethod
    def from_csv(cls, input_file):
        df = read_csv(input_file)
        if list(df.columns[:2]) != ["x", "value"]:
            raise DomainError(f"{input_file}: expected header x,value got " + ",".join(df.columns))
        x = df["x"].to_numpy(dtype=float)
        dx = (x[-1] - x[0]) / (len(x) - 1)
        if np.max(np.abs(np.diff(x) - dx)) > 1e-9 * max(1.0, abs(dx)):
            raise DomainError(f"{input_file}: grid is not uniform")
        return cls(x_min=x[0], dx=dx, values=df["value"].to_numpy(dtype=float))
