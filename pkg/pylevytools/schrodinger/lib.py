import math

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal, LinAlgError

from pylevytools import logger
from pylevytools.core.exceptions import SpectrumError, ParityError, NondegeneracyError
from pylevytools.reconstruct.entities import GridFunction
from pylevytools.schrodinger.entities import Spectrum, MatrixElements

DEGENERACY_TOL = 1e-10
SIGN_THRESHOLD = 1e-6
CONVERGENCE_TOL = 1e-3


def hamiltonian_bands(v, dx):
    """Diagonal and off diagonal of -1/2 D2 + diag(V) on the interior points."""
    d = 1.0 / (dx * dx) + np.asarray(v, dtype=float)
    e = np.full(len(d) - 1, -0.5 / (dx * dx))
    return d, e


def _fix_sign(phi):
    top = np.max(np.abs(phi))
    first = np.flatnonzero(np.abs(phi) > SIGN_THRESHOLD * top)[0]
    return phi if phi[first] > 0 else -phi


def solve(v: GridFunction, K):
    """
    Lowest K eigenpairs of -1/2 d^2/dx^2 + V with hard walls at the ends of the retained
    domain, by Sturm sequence bisection and inverse iteration.
    """
    block = v.retained()
    n, dx = block.n, block.dx
    if not 1 <= K <= n / 4:
        raise ValueError(f"K={K} states need at least {4 * K} retained grid points, got {n}")
    d, e = hamiltonian_bands(block.values[1:-1], dx)
    try:
        w, vectors = eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1), lapack_driver="stebz")
    except LinAlgError as ex:
        raise SpectrumError(f"Tridiagonal eigensolve failed for K={K}, n={n}: {ex}")

    gaps = np.diff(w)
    bad = np.flatnonzero(gaps < DEGENERACY_TOL * (1.0 + np.abs(w[:-1])))
    if len(bad):
        k = int(bad[0])
        raise NondegeneracyError(f"E_{k + 1} - E_{k} = {gaps[k]:.3g} at E_{k} = {w[k]:.12g}")

    states = np.zeros((K, n))
    parity = []
    for k in range(K):
        phi = np.zeros(n)
        phi[1:-1] = vectors[:, k] / math.sqrt(dx)
        overlap = float(np.dot(phi, phi[::-1]) * dx)
        p = 1 if overlap > 0 else -1
        if p != (-1) ** k:
            raise ParityError(f"State {k} has parity {p} (overlap {overlap:.3g}), expected {(-1) ** k}; "
                              f"grid is probably under-resolved (n={n}, dx={dx:.3g})")
        phi = (phi + p * phi[::-1]) / 2.0
        phi /= math.sqrt(trapezoid(phi * phi, dx=dx))
        states[k] = _fix_sign(phi)
        parity.append(p)

    energies = w - w[0]
    logger.info(f"Solved {K} states on {n} points, raw E_0 = {w[0]:.3e}")
    return Spectrum(x_min=block.x_min, dx=dx, energies=energies, states=states, parity=parity, raw_energies=w)


def rayleigh_quotients(v: GridFunction, spectrum: Spectrum):
    block = v.retained()
    d, e = hamiltonian_bands(block.values[1:-1], block.dx)
    inner = spectrum.states[:, 1:-1]
    h_phi = d * inner
    h_phi[:, 1:] += e * inner[:, :-1]
    h_phi[:, :-1] += e * inner[:, 1:]
    return np.sum(inner * h_phi, axis=1) / np.sum(inner * inner, axis=1)


def matrix_elements(spectrum: Spectrum):
    """q_kl = trapezoid int phi_k x phi_l dx, symmetric by construction."""
    phi = spectrum.states
    q = (phi * spectrum.x) @ phi.T * spectrum.dx
    upper = np.triu(q)
    q = upper + np.triu(q, 1).T
    return MatrixElements(q=q, energies=spectrum.energies)


def refine_potential(v: GridFunction, factor):
    """Cubic spline resampling of the retained potential on a grid factor times finer."""
    block = v.retained()
    if factor == 1:
        return block
    spec = block.spec.refined(factor)
    spline = CubicSpline(block.x, block.values)
    values = spline(spec.x)
    return GridFunction.from_spec(spec, (values + values[::-1]) / 2.0)


def convergence_sweep(v: GridFunction, K, levels=(1, 2)):
    """
    Solves on grids refined by each factor in `levels` and estimates the error of the finest
    two by Richardson extrapolation: second order, (E_coarse - E_fine) / (r^2 - 1) for a refinement
    ratio r between them.
    """
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError(f"convergence sweep needs at least two increasing refinement levels, got {list(levels)}")
    energies = [solve(refine_potential(v, factor), K).energies for factor in levels]
    coarse, fine = energies[-2], energies[-1]
    ratio = levels[-1] / levels[-2]
    estimate = (coarse - fine) / (ratio * ratio - 1.0)
    relative = np.abs(estimate) / np.maximum(np.abs(fine), 1e-300)
    relative[0] = 0.0 if estimate[0] == 0 else math.inf
    df = pd.DataFrame({
        "k": np.arange(K),
        "E_coarse": coarse,
        "E_fine": fine,
        "richardson_error": estimate,
        "relative_error": relative,
        "flagged": relative > CONVERGENCE_TOL,
    })
    flagged = df.loc[df["flagged"], "k"].tolist()
    if flagged:
        logger.warning(f"Eigenvalues not converged to {CONVERGENCE_TOL} for states {flagged}")
    return df
