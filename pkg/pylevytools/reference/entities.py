import math

import numpy as np
from scipy import special

from pylevytools.core.attr_dict import AttrDict
from pylevytools.core.exceptions import ClosedFormNotAvailable, DomainError
from pylevytools.core.model import Model
from pylevytools.levy.entities import CauchyTail, BesselK1, AlphaFamily
from pylevytools.reference.lib import bessel_k1, ho_exact


class ClosedForms(AttrDict):
    missing_error = ClosedFormNotAvailable


class ReferenceModel(Model):
    """A model with some of sigma, characteristic, rho, phi0, potential, spectrum in closed form."""

    def closed_forms(self):
        return ClosedForms()

    def to_levy_density(self):
        raise ClosedFormNotAvailable(f"{self!r} has no Levy density of the Poisson-only form")


class HarmonicOscillator(ReferenceModel):
    """V = omega^2 x^2/2 - omega/2, Gaussian ground state; the Levy density is zero."""

    def __init__(self, omega=1.0):
        super().__init__("ho")
        self.omega = float(omega)

    def parameters(self):
        return {"omega": self.omega}

    def validate_config(self):
        if not self.omega > 0:
            raise DomainError(f"Oscillator frequency has to be positive, got {self.omega}")

    def closed_forms(self):
        w = self.omega
        return ClosedForms(
            sigma=lambda y: np.zeros_like(np.asarray(y, dtype=float)),
            characteristic=lambda s: np.exp(-np.asarray(s, dtype=float) ** 2 / (4.0 * w)),
            rho=lambda x: math.sqrt(w / math.pi) * np.exp(-w * np.asarray(x, dtype=float) ** 2),
            phi0=lambda x: (w / math.pi) ** 0.25 * np.exp(-w * np.asarray(x, dtype=float) ** 2 / 2.0),
            potential=lambda x: w * w * np.asarray(x, dtype=float) ** 2 / 2.0 - w / 2.0,
            spectrum=lambda K: ho_exact(w, K),
        )


class CauchyExample(ReferenceModel):
    def __init__(self, a=1.0):
        super().__init__("cauchy")
        self.a = float(a)

    def parameters(self):
        return {"a": self.a}

    def validate_config(self):
        self.to_levy_density().validate_config()

    def to_levy_density(self):
        return CauchyTail(a=self.a)

    def closed_forms(self):
        a = self.a

        def rho(x):
            x = np.asarray(x, dtype=float)
            return a / (np.pi * (a * a + x * x))

        return ClosedForms(
            sigma=self.to_levy_density().sigma,
            characteristic=lambda s: np.exp(-a * np.abs(np.asarray(s, dtype=float))),
            rho=rho,
            phi0=lambda x: np.sqrt(rho(x)),
            potential=lambda x: (2.0 * np.asarray(x, dtype=float) ** 2 - a * a)
                                / (2.0 * (a * a + np.asarray(x, dtype=float) ** 2) ** 2),
        )


class BesselExample(ReferenceModel):
    def __init__(self, b=1.0, rho=1.0):
        super().__init__("bessel")
        self.b = float(b)
        self.rho = float(rho)

    def parameters(self):
        return {"b": self.b, "rho": self.rho}

    def validate_config(self):
        self.to_levy_density().validate_config()

    def to_levy_density(self):
        return BesselK1(b=self.b, rho=self.rho)

    def closed_forms(self):
        b, r = self.b, self.rho

        def sigma(y):
            y = np.abs(np.asarray(y, dtype=float))
            return b * r * bessel_k1(r * y) / (np.pi * y)

        def rho(x):
            d = np.sqrt(np.asarray(x, dtype=float) ** 2 + b * b)
            return b * r / np.pi * bessel_k1(r * d) / d * math.exp(b * r)

        return ClosedForms(
            sigma=sigma,
            characteristic=lambda s: np.exp(-b * np.sqrt(np.asarray(s, dtype=float) ** 2 + r * r) + b * r),
            rho=rho,
            phi0=lambda x: np.sqrt(rho(x)),
        )


class AlphaExample(ReferenceModel):
    def __init__(self, alpha=2.5):
        super().__init__("alpha")
        self.alpha = float(alpha)

    def parameters(self):
        return {"alpha": self.alpha}

    def validate_config(self):
        self.to_levy_density().validate_config()

    def to_levy_density(self):
        return AlphaFamily(alpha=self.alpha)

    def moment(self, p):
        """int y^2p sigma(y) dy = Gamma((2p + 1 - alpha)/2) / pi."""
        return float(special.gamma((2 * p + 1 - self.alpha) / 2.0) / math.pi)

    def closed_forms(self):
        return ClosedForms(sigma=self.to_levy_density().sigma)
