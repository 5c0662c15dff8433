from dataclasses import dataclass

import numpy as np
import pandas as pd

from pylevytools.data.tools import write_csv


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Lowest K eigenpairs on the retained grid. `energies` are shifted so energies[0] == 0,
    `raw_energies` keep the unshifted values. states[k] is trapezoid normalized and vanishes
    at both walls.
    """
    x_min: float
    dx: float
    energies: np.ndarray
    states: np.ndarray
    parity: tuple
    raw_energies: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "energies", _frozen(self.energies))
        object.__setattr__(self, "raw_energies", _frozen(self.raw_energies))
        object.__setattr__(self, "states", _frozen(self.states))
        object.__setattr__(self, "parity", tuple(int(p) for p in self.parity))

    @property
    def K(self):
        return len(self.energies)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def x(self):
        return (np.arange(self.n) - (self.n - 1) // 2) * self.dx

    @property
    def raw_e0(self):
        return float(self.raw_energies[0])

    def with_flipped_signs(self, indices):
        states = np.array(self.states)
        states[list(indices)] *= -1.0
        return Spectrum(self.x_min, self.dx, self.energies, states, self.parity, self.raw_energies)

    def to_frame(self):
        return pd.DataFrame({"k": np.arange(self.K), "E_k": self.energies, "parity": self.parity})

    def states_frame(self):
        df = pd.DataFrame(self.states.T, columns=[f"phi_{k}" for k in range(self.K)])
        df.insert(0, "x", self.x)
        return df

    def to_csv(self, output_file):
        return write_csv(self.to_frame(), output_file)

    def states_to_csv(self, output_file):
        return write_csv(self.states_frame(), output_file)


@dataclass(frozen=True, eq=False)
class MatrixElements:
    """q[k, l] = <k|Q|l> for the shifted energies it was computed with."""
    q: np.ndarray
    energies: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] != len(self.energies):
            raise ValueError(f"q has shape {q.shape}, expected {len(self.energies)}x{len(self.energies)}")
        if not np.array_equal(q, q.T):
            raise ValueError("matrix elements have to be exactly symmetric")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "energies", _frozen(self.energies))

    @property
    def K(self):
        return len(self.energies)

    def truncated(self, K):
        if not 1 <= K <= self.K:
            raise ValueError(f"cannot truncate {self.K} states to {K}")
        return MatrixElements(self.q[:K, :K], self.energies[:K])

    def with_flipped_signs(self, indices):
        signs = np.ones(self.K)
        signs[list(indices)] = -1.0
        return MatrixElements(signs[:, None] * self.q * signs[None, :], self.energies)

    def parity_violation(self):
        """max |q_kl| over k + l even, relative to max |q|."""
        k, l = np.indices(self.q.shape)
        top = np.max(np.abs(self.q))
        if top == 0:
            return 0.0
        return float(np.max(np.abs(self.q[(k + l) % 2 == 0])) / top)

    def to_frame(self):
        return pd.DataFrame(self.q, columns=[str(k) for k in range(self.K)])

    def to_csv(self, output_file):
        return write_csv(self.to_frame(), output_file)
