from pylevytools import logger
from pylevytools.core.attr_dict import AttrDict
from pylevytools.core.exceptions import ConfigError
from pylevytools.core.model import Model


DEFAULT_SETTINGS = {
    # quadrature tolerances for the Levy exponent and moments
    "abs_tol": 1e-12,
    "rel_tol": 1e-10,
    "quad_limit": 4000,
    # series region (0, eps) of the Levy exponent, eps = series_eps / s
    "series_eps": 1e-4,
    # sigma integrals beyond this point are handled as an oscillatory tail
    "tail_cutoff": 64.0,
    # characteristic function level that makes the cosine transform truncation negligible
    "c_tail": 1e-10,
    "s_max_start": 16.0,
    # negative lobes down to clip_tol * max(rho) are quadrature ringing
    "clip_tol": 1e-8,
    # potential: grid points with phi0 < domain_floor * max(phi0) leave the retained domain
    "domain_floor": 1e-8,
}

default_env_manager = None


def get_env_manager():
    global default_env_manager
    if not default_env_manager:
        set_env_manager(EnvManager())
    return default_env_manager


def set_env_manager(env_manager):
    global default_env_manager
    default_env_manager = env_manager


def get_settings():
    return get_env_manager().settings


class EnvManager:
    def __init__(self, settings=None, cache=None):
        self.settings = AttrDict(**DEFAULT_SETTINGS)
        self._model_factories = dict()
        self.cache = cache
        if settings:
            self.update_settings(settings)
        self._register_default_models()

    def update_settings(self, settings):
        for key, value in settings.items():
            if key not in DEFAULT_SETTINGS:
                raise ConfigError(f"Unknown setting {key}. Available settings: " + str(list(DEFAULT_SETTINGS.keys())))
            self.settings._add_attr(key, type(DEFAULT_SETTINGS[key])(value))
        logger.debug("Settings: " + str(self.settings.to_dict()))

    def register_model(self, key, factory):
        assert factory is not None, "factory cannot be None"
        if key in self._model_factories:
            raise Exception("Model already registered for " + str(key))
        self._model_factories[key] = factory

    def get_model_keys(self):
        return list(self._model_factories.keys())

    def create_model(self, key, **params):
        if key not in self._model_factories:
            raise ConfigError(f"Model {key} not found. Available models: " + str(self.get_model_keys()))
        model = self._model_factories[key](**params)
        assert isinstance(model, Model), f"Factory for {key} did not return a Model"
        model.validate_config()
        return model

    def get_cache(self):
        return self.cache

    def set_cache(self, cache):
        self.cache = cache

    def _register_default_models(self):
        from pylevytools.levy import entities as levy_entities
        from pylevytools.reference import entities as reference_entities

        self.register_model("cauchy", levy_entities.CauchyTail)
        self.register_model("bessel", levy_entities.BesselK1)
        self.register_model("alpha", levy_entities.AlphaFamily)
        self.register_model("basic", levy_entities.BasicFunctionFamily)
        self.register_model("tabulated", levy_entities.Tabulated.from_csv)
        self.register_model("ho", reference_entities.HarmonicOscillator)
