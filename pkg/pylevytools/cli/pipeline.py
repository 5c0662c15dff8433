import math
import platform
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

import pylevytools
from pylevytools import logger
from pylevytools.cli.config import PipelineConfig
from pylevytools.core.cache import CacheConnector, CachedDecorator
from pylevytools.core.env_manager import get_env_manager, set_env_manager, get_settings
from pylevytools.core.exceptions import StageError
from pylevytools.correlators.lib import build_chi2_report, two_point
from pylevytools.data.tools import write_csv, write_json, save_dataframes_to_excel
from pylevytools.reconstruct.entities import GridFunction
from pylevytools.reconstruct.lib import (density_from_characteristic, ground_state, potential,
                                         zero_mode_residual, tail_decay_exponent)
from pylevytools.reference.entities import HarmonicOscillator
from pylevytools.sampler.lib import (drift, simulate, estimate_chi2, estimate_autocovariance,
                                     time_average)
from pylevytools.schrodinger.lib import solve, matrix_elements, convergence_sweep
from pylevytools.tools.misc import ProfileDecorator

STAGES = ["density", "spectrum", "chi2", "sample"]
REQUIRES = {"density": [], "spectrum": ["density"], "chi2": ["spectrum"], "sample": ["density"]}
FAILED_MARKER = "FAILED"


@CachedDecorator(cache_key="density")
def cached_density(sigma, grid, s_max, power, settings):
    return density_from_characteristic(sigma, grid, s_max=s_max, power=power)


def resolve_stages(stages):
    """Requested stages plus everything they depend on, in pipeline order."""
    needed = set()

    def add(stage):
        if stage not in REQUIRES:
            raise StageError("config", f"Unknown stage {stage}. Available: {STAGES}")
        needed.add(stage)
        for dep in REQUIRES[stage]:
            add(dep)

    for stage in stages:
        add(stage)
    return [s for s in STAGES if s in needed]


class PipelineRun(object):
    def __init__(self, config: PipelineConfig, out_dir=None, seed=None):
        self.config = config
        self.out = Path(out_dir or config.output.dir)
        self.seed = config.sampler.seed if seed is None else int(seed)
        self.timings = {}
        self.diagnostics = {}
        self.artifacts = []
        self.model = None
        self.rho = self.phi0 = self.v = None
        self.spectrum = self.q = None
        self.report = None
        self.sampler = None
        self.frames = {}

    def _write(self, name, writer, obj):
        path = self.out / name
        writer(obj, path)
        self.artifacts.append(name)
        logger.info("Saved: " + str(path))

    def _csv(self, name, df):
        self._write(name, write_csv, df)

    @property
    def is_oscillator(self):
        return isinstance(self.model, HarmonicOscillator)

    def stage_density(self):
        self.model = self.config.create_model()
        grid = self.config.grid_spec
        if self.is_oscillator:
            forms = self.model.closed_forms()
            self.rho = GridFunction.from_function(grid, forms.rho)
            self.phi0 = ground_state(self.rho)
            self.v = GridFunction.from_function(grid, forms.potential)
        else:
            inversion = self.config.inversion
            self.rho = cached_density(self.model, grid, inversion.s_max, inversion.power,
                                      get_settings().to_dict())
            self.phi0 = ground_state(self.rho)
            self.v = potential(self.phi0)
            self.diagnostics["zero_mode_residual"] = zero_mode_residual(self.phi0, self.v)
        retained = self.v.retained()
        self.diagnostics.update({
            "mass_on_grid": self.rho.integral(),
            "retained_half_width": float(retained.x[-1]),
            "retained_points": retained.n,
            "tail_decay_exponent": tail_decay_exponent(self.phi0, self.v),
        })
        self._csv("density.csv", self.rho.to_frame())
        self._csv("phi0.csv", self.phi0.to_frame())
        v_frame = self.v.to_frame()
        if self.v.mask is not None:
            v_frame["retained"] = self.v.mask
        self._csv("potential.csv", v_frame)

    def stage_spectrum(self):
        K = self.config.spectrum.K
        if self.is_oscillator and self.config.model.mode == "analytic":
            self.q = self.model.closed_forms().spectrum(K)
            parity = [(-1) ** k for k in range(K)]
            self.frames["spectrum"] = pd.DataFrame({"k": np.arange(K), "E_k": self.q.energies, "parity": parity})
        else:
            self.spectrum = solve(self.v, K)
            self.q = matrix_elements(self.spectrum)
            self.frames["spectrum"] = self.spectrum.to_frame()
            self.diagnostics["raw_e0"] = self.spectrum.raw_e0
            if self.config.spectrum.sweep:
                self.frames["convergence"] = convergence_sweep(self.v, K, self.config.spectrum.levels)
                self._csv("convergence.csv", self.frames["convergence"])
            if self.config.spectrum.save_states:
                self._write("states.csv", lambda s, p: s.states_to_csv(p), self.spectrum)
        self.diagnostics["parity_violation"] = self.q.parity_violation()
        self.frames["Q"] = self.q.to_frame()
        self._csv("spectrum.csv", self.frames["spectrum"])
        self._csv("Q.csv", self.frames["Q"])

    def stage_chi2(self):
        c = self.config.chi2
        self.report = build_chi2_report(self.q, c.T, energy_scale=c.energy_scale,
                                        convergence_step=c.convergence_step, convergence_tol=c.convergence_tol)
        if self.report.chi2_small < -1e-10:
            logger.warning(f"Sharp time truncated fourth moment is negative: {self.report.chi2_small}")
        self.frames["chi2_curve"] = self.report.curve
        self.frames["terms"] = self.report.term_breakdown
        self._write("chi2_report.json", lambda r, p: r.to_json(p), self.report)
        self._csv("chi2_curve.csv", self.report.curve)

    def stage_sample(self):
        s = self.config.sampler
        n_steps = s.n_steps or int(math.ceil(max([2.0 * t for t in s.T] + list(s.lags)) / s.dt))
        b = drift(self.phi0)
        ensemble = simulate(b, self.rho, s.dt, n_steps, s.n_paths, self.seed, windows=s.T, lags=s.lags,
                            burn_in=s.burn_in)
        energy_scale = self.config.chi2.energy_scale
        windows = []
        for T in s.T:
            estimate, error = estimate_chi2(ensemble, T, energy_scale)
            windows.append({"T": T, "estimate": estimate, "standard_error": error})
        lags = []
        for tau in s.lags:
            estimate, error = estimate_autocovariance(ensemble, tau)
            row = {"lag": tau, "estimate": estimate, "standard_error": error}
            if self.q is not None:
                row["spectral"] = two_point(self.q, tau)
            lags.append(row)
        mean, error = time_average(ensemble)
        self.sampler = {
            **ensemble.describe(),
            "chi2": windows,
            "autocovariance": lags,
            "time_average": {"estimate": mean, "standard_error": error},
        }
        self._write("sampler.json", write_json, self.sampler)

    def manifest(self, status, stages, message=None):
        config = self.config.to_dict()
        config["sampler"]["seed"] = self.seed
        return {
            "status": status,
            "message": message,
            "stages": stages,
            "config": config,
            "seed": self.seed,
            "model": self.model.describe() if self.model is not None else None,
            "versions": {
                "pylevytools": pylevytools.__version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
                "python": platform.python_version(),
            },
            "timings": self.timings,
            "diagnostics": self.diagnostics,
            "artifacts": self.artifacts,
        }

    def run(self, stages=None):
        if stages is None:
            stages = STAGES if self.config.sampler.enabled else STAGES[:3]
        stages = resolve_stages(stages)
        self.out.mkdir(parents=True, exist_ok=True)
        marker = self.out / FAILED_MARKER
        if marker.exists():
            marker.unlink()

        previous = get_env_manager()
        env = self.config.env_manager()
        if self.config.output.cache_folder:
            env.set_cache(CacheConnector(self.config.output.cache_folder))
        set_env_manager(env)
        current = None
        try:
            for current in stages:
                logger.info(f"Stage {current} started")
                ProfileDecorator(self.timings, current)(getattr(self, "stage_" + current))()
                logger.info(f"Stage {current} finished in {self.timings[current]:.3f} s")
            if self.config.output.xlsx:
                names = [n for n in ("spectrum", "Q", "chi2_curve", "terms", "convergence") if n in self.frames]
                self._write("report.xlsx", lambda f, p: save_dataframes_to_excel(f, names, p),
                            [self.frames[n] for n in names])
        except Exception as e:
            error = e if isinstance(e, StageError) else StageError(current or "setup", str(e))
            logger.error(str(error))
            marker.write_text(str(error) + "\n")
            write_json(self.manifest("failed", stages, str(error)), self.out / "run.json")
            return 1
        finally:
            set_env_manager(previous)
        write_json(self.manifest("ok", stages), self.out / "run.json")
        return 0


def run_pipeline(config: PipelineConfig, out_dir=None, stages=None, seed=None):
    """Runs the requested stages and writes their artifacts; returns the exit status."""
    return PipelineRun(config, out_dir=out_dir, seed=seed).run(stages)


def scan(config: PipelineConfig, alphas, out_dir=None):
    """chi2_small / chi2_large with convergence flags for each alpha; writes alpha_scan.csv."""
    out = Path(out_dir or config.output.dir)
    rows = []
    for alpha in alphas:
        cfg = config.with_values("model", family="alpha", alpha=alpha)
        run = PipelineRun(cfg, out_dir=out / f"alpha_{alpha:g}")
        status = run.run(["chi2"])
        row = {"alpha": alpha, "status": "ok" if status == 0 else "failed"}
        if run.report is not None:
            row.update({
                "K": run.report.truncation_K,
                "chi2_small": run.report.chi2_small,
                "chi2_large": run.report.chi2_large,
                "small_flag": run.report.convergence_flags.get("chi2_small"),
                "large_flag": run.report.convergence_flags.get("chi2_large"),
                "large_delta": run.report.convergence_deltas.get("chi2_large"),
                "tail_decay_exponent": run.diagnostics.get("tail_decay_exponent"),
            })
        rows.append(row)
    df = pd.DataFrame(rows)
    write_csv(df, out / "alpha_scan.csv")
    logger.info("Saved: " + str(out / "alpha_scan.csv"))
    return df
