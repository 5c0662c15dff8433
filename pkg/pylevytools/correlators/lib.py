import math

import numpy as np
import pandas as pd

from pylevytools import logger
from pylevytools.core.exceptions import SpectrumError
from pylevytools.correlators.entities import Chi2Report
from pylevytools.correlators.integrals import ordered_integral, pair_integral
from pylevytools.schrodinger.entities import MatrixElements

CONVERGENCE_TOL = 1e-3
CONVERGENCE_STEP = 4
BREAKDOWN_SIZE = 20
ZERO_FLOOR = 1e-12


def parity_allowed(q: MatrixElements):
    """q with the entries that connect equal parities set to exactly zero."""
    k, l = np.indices(q.q.shape)
    return np.where((k + l) % 2 == 1, q.q, 0.0)


def _excited_energies(q: MatrixElements):
    e = q.energies[1:]
    if np.any(e <= 0):
        raise SpectrumError(f"All excited energies have to be positive, got min {np.min(e)}")
    return e


def _path_products(m, v):
    """v_k m_kl m_lm v_m for all (k, l, m), ascending in k, then l, then m."""
    return np.einsum("k,kl,lm,m->klm", v, m, m, v)


def two_point(q: MatrixElements, lag):
    """<X(t) X(u)> = sum_{n>=1} q_0n^2 exp(-E_n (t - u)) for lag = t - u >= 0."""
    lags = np.atleast_1d(np.asarray(lag, dtype=float))
    if np.any(lags < 0):
        raise ValueError("two point function needs lag >= 0")
    v2 = parity_allowed(q)[0, 1:] ** 2
    e = q.energies[1:]
    values = np.array([math.fsum(v2 * np.exp(-e * t)) for t in lags])
    return float(values[0]) if np.ndim(lag) == 0 else values


def sharp_moment4(q: MatrixElements):
    m = parity_allowed(q)
    return math.fsum(_path_products(m, m[:, 0]).ravel())


def _excited_terms(q: MatrixElements):
    m = parity_allowed(q)
    v = m[1:, 0]
    return _path_products(m[1:, 1:], v), v * v


def chi2_small(q: MatrixElements, energy_scale=None):
    """
    Sharp time truncated fourth moment
    sum_{k,l,m>=1} q_0k q_kl q_lm q_m0 - 2 sum_{k,m>=1} q_0k^2 q_0m^2.
    """
    paths, v2 = _excited_terms(q)
    value = math.fsum([math.fsum(paths.ravel()), -2.0 * math.fsum(np.outer(v2, v2).ravel())])
    return value / energy_scale ** 4 if energy_scale else value


def chi2_large(q: MatrixElements, energy_scale=None):
    """Large T limit 24 sum q_0k q_kl q_lm q_m0 / (E_k E_l E_m) - 24 sum q_0k^2 q_0m^2 / (E_k E_m^2)."""
    e = _excited_energies(q)
    paths, v2 = _excited_terms(q)
    denominators = e[:, None, None] * e[None, :, None] * e[None, None, :]
    connected = math.fsum((paths / denominators).ravel())
    disconnected = math.fsum(np.outer(v2 / e, v2 / (e * e)).ravel())
    value = 24.0 * math.fsum([connected, -disconnected])
    return value / energy_scale if energy_scale else value


def window_cumulant(q: MatrixElements, T):
    """
    Truncated fourth moment of W = int_{-T}^{T} X(t) dt:
    24 sum_{k,m>=1, l>=0} q_0k q_kl q_lm q_m0 I(E_k, E_l, E_m; T) - 3 (sum_k q_0k^2 J(E_k; T))^2.
    """
    e = q.energies
    _excited_energies(q)
    m = parity_allowed(q)
    v = m[:, 0]
    paths = _path_products(m, v)
    integrals = {}
    four = []
    for k, l, n in np.argwhere(paths != 0.0):
        key = tuple(sorted((k, l, n)))
        if key not in integrals:
            integrals[key] = ordered_integral(e[k], e[l], e[n], T)
        four.append(paths[k, l, n] * integrals[key])
    two = math.fsum(v[k] ** 2 * pair_integral(e[k], T) for k in range(1, q.K) if v[k] != 0.0)
    return math.fsum([24.0 * math.fsum(four), -3.0 * two * two])


def chi2_scale(T, energy_scale=None):
    x = 2.0 * T * (energy_scale or 1.0)
    return (1.0 + x) ** 3 / x ** 4


def chi2_exact(q: MatrixElements, T, energy_scale=None):
    if not T > 0:
        raise ValueError(f"chi2 needs T > 0, got {T}")
    return chi2_scale(T, energy_scale) * window_cumulant(q, T)


def small_window_ratio(chi2_T, chi2_small_value, T, energy_scale=None):
    """
    chi2(T) / ((1 + 2ET)^3 chi2_small). The window cumulant approaches (2T)^4 times the sharp
    time cumulant, so chi2(T) itself tends to (1 + 2ET)^3 chi2_small and only this ratio tends to 1.
    """
    x = 2.0 * T * (energy_scale or 1.0)
    return chi2_T / ((1.0 + x) ** 3 * chi2_small_value)


def stationarity_check(q: MatrixElements, tau, lags, base=0.0):
    """max |G(t + tau, u + tau) - G(t, u)| over u = base, t = base + lag."""
    deviations = [0.0]
    for lag in lags:
        u, t = base, base + lag
        original = two_point(q, abs(t - u))
        shifted = two_point(q, abs((t + tau) - (u + tau)))
        deviations.append(abs(shifted - original))
    return max(deviations)


def term_breakdown(q: MatrixElements, size=BREAKDOWN_SIZE):
    e = _excited_energies(q)
    paths, _ = _excited_terms(q)
    large = 24.0 * paths / (e[:, None, None] * e[None, :, None] * e[None, None, :])
    order = np.argsort(-np.abs(large).ravel(), kind="stable")[:size]
    k, l, m = np.unravel_index(order, paths.shape)
    return pd.DataFrame({
        "k": k + 1, "l": l + 1, "m": m + 1,
        "small_term": paths.ravel()[order],
        "large_term": large.ravel()[order],
    })


def _relative_change(full, truncated):
    return abs(full - truncated) / max(abs(full), ZERO_FLOOR)


def build_chi2_report(q: MatrixElements, t_values, energy_scale=None,
                      convergence_step=CONVERGENCE_STEP, convergence_tol=CONVERGENCE_TOL):
    t_values = [float(t) for t in t_values]
    small = chi2_small(q, energy_scale)
    large = chi2_large(q, energy_scale)
    curve = [chi2_exact(q, t, energy_scale) for t in t_values]

    flags, deltas = {}, {}
    if q.K - convergence_step >= 2:
        coarse = q.truncated(q.K - convergence_step)
        deltas["chi2_small"] = _relative_change(small, chi2_small(coarse, energy_scale))
        deltas["chi2_large"] = _relative_change(large, chi2_large(coarse, energy_scale))
        deltas["curve"] = max([_relative_change(c, chi2_exact(coarse, t, energy_scale))
                               for t, c in zip(t_values, curve)], default=0.0)
        flags = {name: delta > convergence_tol for name, delta in deltas.items()}
    else:
        flags = {"chi2_small": True, "chi2_large": True, "curve": True}
        deltas = {name: math.nan for name in flags}
    for name, flag in flags.items():
        if flag:
            logger.warning(f"{name} not converged in K={q.K} (relative change {deltas[name]:.3g} "
                           f"against K={q.K - convergence_step})")

    logger.info(f"chi2_small = {small:.12g}, chi2_large = {large:.12g} (K={q.K})")
    return Chi2Report(
        chi2_small=small,
        chi2_large=large,
        curve=pd.DataFrame({"T": t_values, "chi2": curve}),
        truncation_K=q.K,
        term_breakdown=term_breakdown(q),
        convergence_flags=flags,
        convergence_deltas=deltas,
        convergence_tol=convergence_tol,
        two_point_0=two_point(q, 0.0),
        sharp_moment4=sharp_moment4(q),
        energy_scale=energy_scale,
    )
