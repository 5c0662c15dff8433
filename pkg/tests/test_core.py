import math

import numpy as np
import pandas as pd
import pytest

from pylevytools.core.attr_dict import AttrDict
from pylevytools.core.cache import CacheConnector, CachedDecorator
from pylevytools.core.env_manager import EnvManager, get_env_manager, set_env_manager, get_settings, DEFAULT_SETTINGS
from pylevytools.core.exceptions import (ConfigError, StageError, QuadratureError, ClosedFormNotAvailable,
                                         ParityError, SpectrumError, PyLevyToolsException)
from pylevytools.data.tools import write_csv, read_csv, to_json, write_json, save_dataframes_to_excel
from pylevytools.levy.entities import CauchyTail, BesselK1
from pylevytools.reference.entities import ClosedForms, HarmonicOscillator
from pylevytools.tools.misc import batch, str_to_list, float_list, ProfileDecorator
from pylevytools.tools.test import report_check, PASS, FAIL, SKIP


def test_attr_dict_access():
    d = AttrDict(a=1, b="x")
    assert d.a == 1
    assert d.get("b") == "x"
    assert "a" in d
    assert d.to_dict() == {"a": 1, "b": "x"}
    with pytest.raises(AttributeError):
        d.c


def test_attr_dict_lazy_initializer():
    calls = []

    def init(d):
        calls.append(1)
        d._add_attr("value", 3)

    d = AttrDict(initializer=init)
    assert calls == []
    assert d.value == 3
    assert d.value == 3
    assert calls == [1]


def test_closed_forms_missing_is_attribute_error():
    forms = ClosedForms(rho=lambda x: x)
    with pytest.raises(ClosedFormNotAvailable):
        forms.potential
    assert not hasattr(forms, "potential")


def test_exception_hierarchy():
    assert issubclass(ParityError, SpectrumError)
    assert issubclass(ClosedFormNotAvailable, PyLevyToolsException)
    e = StageError("density", "boom")
    assert e.stage == "density"
    assert str(e) == "density: boom"
    q = QuadratureError("failed", partial=1.5, error_estimate=1e-3)
    assert q.partial == 1.5 and q.error_estimate == 1e-3


def test_env_manager_settings():
    env = EnvManager(settings={"abs_tol": "1e-9"})
    assert env.settings.abs_tol == 1e-9
    assert env.settings.rel_tol == DEFAULT_SETTINGS["rel_tol"]
    with pytest.raises(ConfigError):
        env.update_settings({"no_such_setting": 1.0})


def test_env_manager_global():
    env = EnvManager(settings={"clip_tol": 1e-6})
    set_env_manager(env)
    assert get_env_manager() is env
    assert get_settings().clip_tol == 1e-6


def test_env_manager_models():
    env = EnvManager()
    assert set(env.get_model_keys()) == {"cauchy", "bessel", "alpha", "basic", "tabulated", "ho"}
    model = env.create_model("cauchy", a=2.0)
    assert isinstance(model, CauchyTail)
    assert model.a == 2.0
    assert isinstance(env.create_model("ho", omega=2.0), HarmonicOscillator)
    with pytest.raises(ConfigError):
        env.create_model("gauss")
    with pytest.raises(Exception):
        env.register_model("cauchy", CauchyTail)


def test_model_repr_and_describe():
    model = BesselK1(b=1.0, rho=2.0)
    assert repr(model) == "BesselK1 - bessel(b=1.0, rho=2.0)"
    assert model.describe() == {"key": "bessel", "b": 1.0, "rho": 2.0}


def test_cache_connector_memory_and_folder(tmp_path):
    calls = []

    def retriever():
        calls.append(1)
        return {"value": 42}

    cache = CacheConnector(str(tmp_path))
    assert cache.get_from_cache("key", retriever) == {"value": 42}
    assert cache.get_from_cache("key", retriever) == {"value": 42}
    assert len(calls) == 1

    reopened = CacheConnector(str(tmp_path))
    assert reopened.get_from_cache("key", retriever) == {"value": 42}
    assert len(calls) == 1
    assert reopened.get_from_cache("missing") is None


def test_cache_connector_dataframe_as_parquet(tmp_path):
    cache = CacheConnector(str(tmp_path))
    df = pd.DataFrame({"x": [0.1, 0.2], "value": [1.0, 2.0]})
    cache.add_to_cache("frame", df)
    assert list(tmp_path.glob("*.parquet"))
    pd.testing.assert_frame_equal(CacheConnector(str(tmp_path)).get_from_cache("frame"), df)
    cache.clear()
    assert not list(tmp_path.glob("PYLEVYTOOLS_CACHE_*"))


def test_cache_force_reload(tmp_path):
    values = iter([1, 2])
    cache = CacheConnector(str(tmp_path), force_reload_from_source=True)
    assert cache.get_from_cache("k", lambda: next(values)) == 1
    assert cache.get_from_cache("k", lambda: next(values)) == 2


def test_cached_decorator(tmp_path):
    calls = []

    @CachedDecorator(cache=CacheConnector(str(tmp_path)), cache_key="square")
    def square(x):
        calls.append(x)
        return x * x

    assert square(3) == 9
    assert square(3) == 9
    assert square(4) == 16
    assert calls == [3, 4]


def test_cached_decorator_without_cache_calls_through():
    calls = []

    @CachedDecorator()
    def identity(x):
        calls.append(x)
        return x

    identity(1)
    identity(1)
    assert calls == [1, 1]


def test_misc_helpers():
    assert list(batch(list(range(7)), 3)) == [[0, 1, 2], [3, 4, 5], [6]]
    assert list(batch(range(4), 2)) == [range(0, 2), range(2, 4)]
    assert str_to_list(" a, b ,,c ") == ["a", "b", "c"]
    assert str_to_list(None) == []
    assert float_list("0.5, 1, 2") == [0.5, 1.0, 2.0]
    assert float_list([1, 2]) == [1.0, 2.0]


def test_profile_decorator_accumulates():
    timings = {}
    fn = ProfileDecorator(timings, "work")(lambda: 5)
    assert fn() == 5
    fn()
    assert timings["work"] >= 0.0
    assert list(timings) == ["work"]


def test_csv_round_trip_is_exact(tmp_path):
    values = np.array([0.1 + 0.2, math.pi, 1e-300, -2.0 / 3.0])
    df = pd.DataFrame({"x": np.arange(4.0), "value": values})
    write_csv(df, tmp_path / "sub" / "f.csv")
    back = read_csv(tmp_path / "sub" / "f.csv")
    np.testing.assert_array_equal(back["value"].to_numpy(), values)


def test_json_sorted_and_stable(tmp_path):
    obj = {"b": np.float64(0.1), "a": [np.int64(1), math.nan, math.inf], "c": np.array([True, False])}
    text = to_json(obj)
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert '"nan"' in text and '"inf"' in text
    write_json(obj, tmp_path / "one.json")
    write_json(obj, tmp_path / "two.json")
    assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()


def test_excel_export(tmp_path):
    out = tmp_path / "report.xlsx"
    save_dataframes_to_excel([pd.DataFrame({"k": [0, 1], "E_k": [0.0, 1.0]}), None], ["spectrum", "skipped"], out)
    assert out.exists()


def test_report_check_prints_status(capsys):
    assert report_check("first", PASS) == PASS
    assert report_check("second", FAIL, "went wrong") == FAIL
    assert report_check("third", SKIP, "disabled") == SKIP
    out = capsys.readouterr().out
    assert "PASS: first" in out
    assert "went wrong" in out
    assert "SKIP: third" in out
