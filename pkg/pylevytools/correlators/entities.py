from dataclasses import dataclass, field
from typing import Optional

import pandas as pd

from pylevytools.data.tools import write_json


@dataclass
class Chi2Report:
    chi2_small: float
    chi2_large: float
    curve: pd.DataFrame
    truncation_K: int
    term_breakdown: pd.DataFrame
    convergence_flags: dict = field(default_factory=dict)
    convergence_deltas: dict = field(default_factory=dict)
    convergence_tol: float = 1e-3
    two_point_0: Optional[float] = None
    sharp_moment4: Optional[float] = None
    energy_scale: Optional[float] = None

    @property
    def converged(self):
        return not any(self.convergence_flags.values())

    def to_dict(self):
        return {
            "chi2_small": self.chi2_small,
            "chi2_large": self.chi2_large,
            "curve": self.curve,
            "truncation_K": self.truncation_K,
            "term_breakdown": self.term_breakdown,
            "convergence_flags": self.convergence_flags,
            "convergence_deltas": self.convergence_deltas,
            "convergence_tol": self.convergence_tol,
            "two_point_0": self.two_point_0,
            "sharp_moment4": self.sharp_moment4,
            "energy_scale": self.energy_scale,
        }

    def to_json(self, output_file):
        return write_json(self.to_dict(), output_file)
