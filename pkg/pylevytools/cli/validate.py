import math
import tempfile

import numpy as np
from scipy import integrate

from pylevytools import logger
from pylevytools.cli.config import PipelineConfig
from pylevytools.cli.pipeline import PipelineRun
from pylevytools.correlators.lib import (chi2_small, chi2_large, chi2_exact, stationarity_check,
                                         build_chi2_report, small_window_ratio)
from pylevytools.data.tools import to_json
from pylevytools.levy.entities import CauchyTail, BesselK1
from pylevytools.levy.lib import levy_exponent, levy_exponent_grid, pairwise_samples, bochner_check
from pylevytools.reconstruct.entities import GridSpec, GridFunction
from pylevytools.reconstruct.lib import density_from_characteristic, ground_state, potential
from pylevytools.reference.entities import HarmonicOscillator, CauchyExample, BesselExample, AlphaExample
from pylevytools.reference.lib import bessel_k1, ho_exact
from pylevytools.sampler.lib import drift, simulate, estimate_chi2, estimate_autocovariance
from pylevytools.schrodinger.entities import MatrixElements
from pylevytools.schrodinger.lib import solve, matrix_elements
from pylevytools.tools.test import report_check, PASS, FAIL, SKIP

CHI2_T = (0.1, 1.0, 10.0)
PERTURBATION = 1e-3


def _run_check(results, name, fn, skip=None):
    if skip:
        results.append((name, report_check(name, SKIP, skip), skip))
        return
    try:
        ok, detail = fn()
    except Exception as e:
        ok, detail = False, f"{type(e).__name__}: {e}"
    status = PASS if ok else FAIL
    results.append((name, report_check(name, status, detail), detail))


def k1_integral_oracle(x):
    """K1(x) = int_0^inf exp(-x cosh t) cosh t dt, cut where exp(-x cosh t) underflows."""
    upper = math.acosh(745.0 / x + 1.0)
    value, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(t), 0.0, upper,
                              epsabs=0.0, epsrel=1e-12, limit=200)
    return value


def chi2_outputs(q: MatrixElements):
    return [chi2_small(q), chi2_large(q)] + [chi2_exact(q, t) for t in CHI2_T]


def perturbed(q: MatrixElements):
    """Adds a parity forbidden element q_02 = q_20."""
    m = np.array(q.q)
    m[0, 2] += PERTURBATION
    m[2, 0] += PERTURBATION
    return MatrixElements(m, q.energies)


class ValidationSuite(object):
    def __init__(self, sampler=False, perturb_q=False, quick=False, seed=12345):
        self.sampler = sampler
        self.perturb_q = perturb_q
        self.quick = quick
        self.seed = seed
        self.results = []
        self.grid = GridSpec(L=12.0, n=2001)
        self._ho_numeric = None
        self._alpha_runs = {}

    def check(self, name, fn, skip=None):
        _run_check(self.results, name, fn, skip)

    def ho_numeric(self):
        if self._ho_numeric is None:
            forms = HarmonicOscillator(1.0).closed_forms()
            spectrum = solve(GridFunction.from_function(self.grid, forms.potential), 9)
            self._ho_numeric = spectrum, matrix_elements(spectrum)
        return self._ho_numeric

    def alpha_run(self, alpha):
        if alpha not in self._alpha_runs:
            config = PipelineConfig({"model": {"family": "alpha", "alpha": alpha},
                                     "spectrum": {"K": 30, "sweep": False},
                                     "chi2": {"T": [0.01, 100.0]}})
            with tempfile.TemporaryDirectory() as out:
                run = PipelineRun(config, out_dir=out)
                if run.run(["chi2"]) != 0:
                    raise RuntimeError(f"alpha={alpha} pipeline failed, see log")
            self._alpha_runs[alpha] = run
        return self._alpha_runs[alpha]

    def oscillator_checks(self):
        q = ho_exact(1.0, 30)
        self.check("oscillator chi2 small/large vanish",
                   lambda: (max(abs(chi2_small(q)), abs(chi2_large(q))) < 1e-12,
                            f"small={chi2_small(q):.3g} large={chi2_large(q):.3g}"))
        self.check("oscillator exact finite T chi2 vanishes",
                   lambda: (max(abs(chi2_exact(q, t)) for t in CHI2_T) < 1e-10,
                            "T=" + ",".join(f"{t:g}:{chi2_exact(q, t):.3g}" for t in CHI2_T)))

        def eigensolver():
            spectrum, m = self.ho_numeric()
            rel = max(abs(spectrum.energies[n] - n) / n for n in range(1, 9))
            # compared up to eigenfunction signs
            q01 = abs(abs(m.q[0, 1]) - 1.0 / math.sqrt(2.0))
            q12 = abs(abs(m.q[1, 2]) - 1.0)
            parity = list(spectrum.parity) == [(-1) ** k for k in range(9)]
            return rel < 1e-3 and q01 < 1e-4 and q12 < 1e-4 and parity, \
                f"max rel E error {rel:.2g}, q01 error {q01:.2g}, q12 error {q12:.2g}"

        self.check("numeric eigensolver on the oscillator", eigensolver)

    def cauchy_checks(self):
        sigma = CauchyTail(a=1.0)
        forms = CauchyExample(1.0).closed_forms()

        def exponent():
            s = np.array([0.5, 1.0, 2.0])
            rel = np.max(np.abs(levy_exponent_grid(sigma, s) - s) / s)
            return rel < 1e-6, f"max rel error {rel:.2g}"

        self.check("cauchy Levy exponent", exponent)
        state = {}

        def density():
            state["rho"] = density_from_characteristic(sigma, self.grid)
            x = self.grid.x
            inner = np.abs(x) <= 10.0
            err = np.max(np.abs(state["rho"].values - forms.rho(x))[inner])
            return err < 1e-4, f"sup error {err:.2g}"

        def cauchy_potential():
            v = potential(ground_state(state["rho"]))
            err = np.max(np.abs(v.values - forms.potential(v.x))[v.mask])
            return err < 1e-3, f"sup error {err:.2g} on the retained domain"

        self.check("cauchy density", density)
        self.check("cauchy potential", cauchy_potential,
                   skip=None if "rho" in state else "density failed")

    def bessel_checks(self):
        sigma = BesselK1(b=1.0, rho=1.0)
        forms = BesselExample(1.0, 1.0).closed_forms()

        def characteristic():
            s = np.array([0.5, 1.0, 2.0])
            err = np.max(np.abs(np.exp(-levy_exponent_grid(sigma, s)) - forms.characteristic(s)))
            return err < 1e-6, f"max error {err:.2g}"

        def k1():
            rel = max(abs(bessel_k1(x) - k1_integral_oracle(x)) / k1_integral_oracle(x) for x in (0.5, 1.0, 5.0))
            return rel < 1e-10, f"max rel error {rel:.2g}"

        def cauchy_limit():
            narrow = BesselK1(b=1.0, rho=1e-3)
            rel = max(abs(levy_exponent(narrow, s) - s) / s for s in (0.5, 1.0, 2.0))
            return rel < 1e-2, f"max rel deviation {rel:.2g}"

        self.check("bessel characteristic function", characteristic)
        self.check("bessel K1 against the integral representation", k1)
        self.check("bessel reduces to cauchy for small rho", cauchy_limit)

    def alpha_checks(self):
        skip = "quick mode" if self.quick else None
        for alpha in (2.0, 2.5):
            reference = AlphaExample(alpha)

            def identity(alpha=alpha, reference=reference):
                run = self.alpha_run(alpha)
                small = run.report.chi2_small
                second = run.report.two_point_0
                rel4 = abs(small - reference.moment(2)) / reference.moment(2)
                rel2 = abs(second - reference.moment(1)) / reference.moment(1)
                return rel4 < 1e-2 and rel2 < 1e-2, f"chi2_small rel {rel4:.2g}, two point rel {rel2:.2g}"

            self.check(f"alpha={alpha:g} truncated moment identity", identity, skip)

        def asymptotics():
            run = self.alpha_run(2.5)
            curve = dict(zip(run.report.curve["T"], run.report.curve["chi2"]))
            ratio = small_window_ratio(curve[0.01], run.report.chi2_small, 0.01, run.report.energy_scale)
            large = run.report.chi2_large
            rel = abs(curve[100.0] - large) / abs(large)
            return 0.95 <= ratio <= 1.05 and rel <= 0.05, \
                f"T=0.01 ratio {ratio:.4f}, T=100 rel deviation {rel:.3g} (chi2_large={large:.6g})"

        self.check("alpha=2.5 asymptotic consistency", asymptotics, skip)

        def positivity():
            values = {a: self.alpha_run(a).report.chi2_small for a in (2.0, 2.5)}
            values["ho"] = chi2_small(self.ho_numeric()[1])
            return min(values.values()) >= -1e-10, str(values)

        self.check("sharp time truncated moment nonnegative", positivity, skip)

    def sampler_checks(self):
        skip = None if self.sampler else "sampler disabled"
        n_paths = 20000 if self.quick else 100000

        def monte_carlo():
            forms = HarmonicOscillator(1.0).closed_forms()
            rho = GridFunction.from_function(self.grid, forms.rho)
            phi0 = ground_state(rho)
            ensemble = simulate(drift(phi0), rho, 0.01, 200, n_paths, self.seed, windows=[1.0], lags=[1.0])
            estimate, error = estimate_chi2(ensemble, 1.0)
            cov, cov_error = estimate_autocovariance(ensemble, 1.0)
            again = estimate_chi2(simulate(drift(phi0), rho, 0.01, 200, n_paths, self.seed, windows=[1.0]), 1.0)
            ok = abs(estimate) <= 3 * error and abs(cov - math.exp(-1) / 2) <= 3 * cov_error
            return ok and again == (estimate, error), \
                f"chi2={estimate:.3g}+-{error:.2g}, lag-1 autocovariance={cov:.4f}+-{cov_error:.2g}"

        self.check("oscillator Monte Carlo", monte_carlo, skip)

    def property_checks(self):
        def bochner():
            sigma = CauchyTail(a=1.0)
            points = [0.0, 1.0, 2.0, 3.0]
            eig = {n: bochner_check(pairwise_samples(sigma, points, 1.0 / n), points) for n in (2, 3, 5)}
            ok = min(eig.values()) >= -1e-10
            for n in (2, 3, 5):
                rho = density_from_characteristic(sigma, self.grid, power=1.0 / n)
                # C^(1/N) is a Cauchy density of scale a/N, truncated to [-L, L]
                mass = 2.0 / math.pi * math.atan(self.grid.L * n / sigma.a)
                ok = ok and float(np.min(rho.values)) >= 0.0 and abs(rho.integral() - mass) < 1e-3
            return ok, f"min eigenvalues {eig}"

        self.check("Bochner check of C^(1/N)", bochner)

        q = self.ho_numeric()[1]
        if self.perturb_q:
            q = perturbed(q)

        def sign_flips():
            rng = np.random.default_rng(self.seed)
            reference = chi2_outputs(q)
            worst = 0.0
            for _ in range(5):
                flips = np.flatnonzero(rng.random(q.K) < 0.5)
                flipped = chi2_outputs(q.with_flipped_signs(flips))
                worst = max([worst] + [abs(a - b) / max(1.0, abs(a)) for a, b in zip(reference, flipped)])
            return worst <= 1e-14, f"max relative change {worst:.2g}"

        def sparsity():
            violation = q.parity_violation()
            return violation <= 1e-10, f"max |q_kl| (k+l even) / max |q| = {violation:.2g}"

        def stationarity():
            rng = np.random.default_rng(self.seed)
            deviation = max([stationarity_check(q, 5.0, [0.0, 0.5, 1.0, 3.0])]
                            + [stationarity_check(q, rng.uniform(0, 10), rng.uniform(0, 5, 8)) for _ in range(5)])
            return deviation <= 1e-14, f"max deviation {deviation:.2g}"

        def determinism():
            first = to_json(build_chi2_report(q, CHI2_T).to_dict())
            second = to_json(build_chi2_report(q, CHI2_T).to_dict())
            return first == second, "identical chi2 reports" if first == second else "reports differ"

        self.check("eigenfunction sign flip invariance", sign_flips)
        self.check("parity sparsity of matrix elements", sparsity)
        self.check("stationarity of the two point function", stationarity)
        self.check("reproducible chi2 reports", determinism)

    def run(self):
        self.oscillator_checks()
        self.cauchy_checks()
        self.bessel_checks()
        self.alpha_checks()
        self.sampler_checks()
        self.property_checks()
        failed = [name for name, status, _ in self.results if status == FAIL]
        logger.info(f"{len(self.results)} checks, {len(failed)} failed")
        return self.results


def validate(sampler=False, perturb_q=False, quick=False, seed=12345):
    """Runs the cross-validation suite; returns (exit status, [(name, status, detail)])."""
    results = ValidationSuite(sampler=sampler, perturb_q=perturb_q, quick=quick, seed=seed).run()
    status = 1 if any(s == FAIL for _, s, _ in results) else 0
    return status, results
