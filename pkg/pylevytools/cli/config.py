import configparser
import copy
import json

from pylevytools.core.attr_dict import AttrDict
from pylevytools.core.env_manager import DEFAULT_SETTINGS, EnvManager, get_env_manager
from pylevytools.core.exceptions import ConfigError
from pylevytools.reconstruct.entities import GridSpec, MIN_GRID_POINTS
from pylevytools.tools.misc import float_list


def _optional_float(value):
    if value is None or str(value).strip().lower() in ("", "auto", "none"):
        return None
    return float(value)


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value}")


def _int_list(value):
    return [int(v) for v in float_list(value)]


def _text(value):
    return "" if value is None else str(value).strip()


# section -> key -> (parser, default, help)
SCHEMA = {
    "model": {
        "family": (_text, "alpha", "cauchy, bessel, alpha, basic, tabulated or ho"),
        "a": (float, 1.0, "cauchy scale"),
        "b": (float, 1.0, "bessel/basic scale"),
        "rho": (float, 1.0, "bessel rate"),
        "alpha": (float, 2.5, "alpha family exponent in [2, 3)"),
        "basic": (_text, "one", "named basic function F: one, k1, gauss"),
        "table": (_text, "", "CSV (x,value) of a tabulated Levy density"),
        "omega": (float, 1.0, "oscillator frequency"),
        "mode": (_text, "numeric", "oscillator: analytic (exact spectrum) or numeric (solve the exact potential)"),
    },
    "grid": {
        "L": (float, 12.0, "half-width of the grid"),
        "n": (int, 2001, "number of grid points, odd"),
    },
    "inversion": {
        "s_max": (_optional_float, None, "cut-off of the cosine transform, auto doubles from s_max_start"),
        "power": (float, 1.0, "invert C^power; 1/N gives the density of one of N summands"),
    },
    "spectrum": {
        "K": (int, 30, "number of states"),
        "sweep": (_bool, True, "run the grid refinement sweep"),
        "levels": (_int_list, [1, 2], "refinement factors of the sweep"),
        "save_states": (_bool, False, "write the eigenfunctions"),
    },
    "chi2": {
        "T": (float_list, [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0], "window half-widths of the chi2 curve"),
        "energy_scale": (_optional_float, None, "characteristic energy E of the (1+2ET)^3/(2ET)^4 scaling"),
        "convergence_step": (int, 4, "compare K against K - convergence_step states"),
        "convergence_tol": (float, 1e-3, "relative change that raises a convergence flag"),
    },
    "sampler": {
        "enabled": (_bool, False, "run the Monte Carlo sampler"),
        "n_paths": (int, 100000, "number of paths"),
        "dt": (float, 0.01, "time step"),
        "n_steps": (int, 0, "steps per path, 0 fits the longest window or lag"),
        "seed": (int, 12345, "random seed"),
        "burn_in": (int, 0, "steps discarded before recording"),
        "T": (float_list, [1.0], "window half-widths"),
        "lags": (float_list, [0.5, 1.0, 2.0], "autocovariance lags"),
    },
    "output": {
        "dir": (_text, "out", "output directory"),
        "xlsx": (_bool, False, "also write report.xlsx"),
        "cache_folder": (_text, "", "cache the density inversion in this folder"),
    },
    "tolerances": {key: (type(value), value, "numerical setting") for key, value in DEFAULT_SETTINGS.items()},
}

FAMILY_PARAMETERS = {
    "cauchy": ["a"],
    "bessel": ["b", "rho"],
    "alpha": ["alpha"],
    "basic": ["basic", "b"],
    "tabulated": ["table"],
    "ho": ["omega"],
}


def defaults():
    return {section: {key: copy.deepcopy(spec[1]) for key, spec in keys.items()} for section, keys in SCHEMA.items()}


def describe_defaults():
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default, text) in keys.items():
            lines.append(f"  {key} = {default}    {text}")
    return "\n".join(lines)


class PipelineConfig(object):
    """Validated pipeline configuration. Sections are AttrDicts: config.grid.n, config.chi2.T, ..."""

    def __init__(self, values=None):
        self._values = defaults()
        for section, items in (values or {}).items():
            self.update(section, items)
        self.validate()

    def update(self, section, items):
        if section not in SCHEMA:
            raise ConfigError(f"Unknown section [{section}]. Available: " + str(list(SCHEMA)))
        for key, raw in items.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"Unknown key {key} in [{section}]. Available: " + str(list(SCHEMA[section])))
            parser = SCHEMA[section][key][0]
            try:
                self._values[section][key] = parser(raw)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {e}")

    @classmethod
    def from_file(cls, path):
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with open(path) as f:
                parser.read_file(f)
        except (OSError, configparser.Error) as e:
            raise ConfigError(f"Cannot read config {path}: {e}")
        return cls({section: dict(parser.items(section)) for section in parser.sections()})

    @classmethod
    def from_manifest(cls, path):
        with open(path) as f:
            manifest = json.load(f)
        if "config" not in manifest:
            raise ConfigError(f"{path} has no config block")
        return cls(manifest["config"])

    def validate(self):
        v = self._values
        if v["model"]["family"] not in FAMILY_PARAMETERS:
            raise ConfigError(f"Unknown model family {v['model']['family']}. Available: " + str(list(FAMILY_PARAMETERS)))
        if v["model"]["mode"] not in ("analytic", "numeric"):
            raise ConfigError(f"[model] mode has to be analytic or numeric, got {v['model']['mode']}")
        if v["model"]["family"] == "tabulated" and not v["model"]["table"]:
            raise ConfigError("[model] table is required for the tabulated family")
        n = v["grid"]["n"]
        if n < MIN_GRID_POINTS or n % 2 == 0:
            raise ConfigError(f"[grid] n has to be odd and >= {MIN_GRID_POINTS}, got {n}")
        if not v["grid"]["L"] > 0:
            raise ConfigError(f"[grid] L has to be positive, got {v['grid']['L']}")
        if v["inversion"]["s_max"] is not None and not v["inversion"]["s_max"] > 0:
            raise ConfigError("[inversion] s_max has to be positive or auto")
        if not v["inversion"]["power"] > 0:
            raise ConfigError("[inversion] power has to be positive")
        if not 2 <= v["spectrum"]["K"] <= n // 4:
            raise ConfigError(f"[spectrum] K has to lie in [2, n/4], got {v['spectrum']['K']}")
        levels = v["spectrum"]["levels"]
        if len(levels) < 2 or min(levels) < 1 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError("[spectrum] levels needs at least two increasing refinement factors >= 1")
        if any(not t > 0 for t in v["chi2"]["T"] + v["sampler"]["T"]):
            raise ConfigError("window half-widths T have to be positive")
        if v["chi2"]["energy_scale"] is not None and not v["chi2"]["energy_scale"] > 0:
            raise ConfigError("[chi2] energy_scale has to be positive")
        if v["chi2"]["convergence_step"] < 1 or not v["chi2"]["convergence_tol"] > 0:
            raise ConfigError("[chi2] convergence_step >= 1 and convergence_tol > 0 required")
        s = v["sampler"]
        if s["n_paths"] < 1 or not s["dt"] > 0 or s["n_steps"] < 0 or s["burn_in"] < 0:
            raise ConfigError("[sampler] needs n_paths >= 1, dt > 0, n_steps >= 0 and burn_in >= 0")
        if any(not t > 0 for t in s["lags"]):
            raise ConfigError("[sampler] lags have to be positive")
        for key, value in v["tolerances"].items():
            if not value > 0:
                raise ConfigError(f"[tolerances] {key} has to be positive, got {value}")

    def __getattr__(self, section):
        if section.startswith("_") or section not in SCHEMA:
            raise AttributeError(section)
        return AttrDict(**self._values[section])

    @property
    def grid_spec(self):
        return GridSpec(L=self._values["grid"]["L"], n=self._values["grid"]["n"])

    def model_parameters(self):
        family = self._values["model"]["family"]
        return {key: self._values["model"][key] for key in FAMILY_PARAMETERS[family]}

    def create_model(self, env_manager=None):
        env_manager = env_manager or get_env_manager()
        return env_manager.create_model(self._values["model"]["family"], **self.model_parameters())

    def env_manager(self):
        return EnvManager(settings=self._values["tolerances"])

    def with_values(self, section, **items):
        values = copy.deepcopy(self._values)
        values[section].update(items)
        return PipelineConfig(values)

    def to_dict(self):
        return copy.deepcopy(self._values)
