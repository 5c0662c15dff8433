import functools
import os
import os.path as path
import pickle
import tempfile
from pathlib import Path

import pandas

from pylevytools import get_default_logger
from pylevytools.core.env_manager import get_env_manager
from pylevytools.tools.misc import get_text_hexdigest

logger = get_default_logger()


class CacheConnector(object):
    """
    Two level cache (memory, then folder) for deterministic stage results.
    DataFrames are stored as parquet files, anything else is pickled.
    """

    def __init__(self, folder=None, force_reload_from_source=False):
        self.folder = folder
        if folder is None:
            self.folder = os.path.join(tempfile.gettempdir(), "PYLEVYTOOLS_CACHE")
        Path(self.folder).mkdir(parents=True, exist_ok=True)
        self._cache = dict()
        self.force_reload_from_source = force_reload_from_source

    def add_to_cache(self, key, obj):
        self._add_to_cache(self.get_cache_key(key), obj)

    def _add_to_cache(self, cache_key, obj):
        file = os.path.join(self.folder, cache_key)
        Path(self.folder).mkdir(parents=True, exist_ok=True)
        if isinstance(obj, pandas.DataFrame):
            filename = file + ".parquet"
            obj.to_parquet(filename)
        else:
            filename = file + ".pickle.dump"
            with open(filename, 'wb') as f:
                pickle.dump(obj, f)
        logger.debug("Saved to cache as: " + filename)
        self._cache[cache_key] = obj

    def clear(self):
        self._cache = dict()
        for f in Path(self.folder).glob("PYLEVYTOOLS_CACHE_*"):
            f.unlink()

    def get_from_cache(self, key, retriever=None, force_reload_from_source=False):
        cache_key = self.get_cache_key(key)
        reload_from_source = self.force_reload_from_source or force_reload_from_source

        if reload_from_source:
            logger.debug("Cache lookup disabled - force_reload_from_source flag is ON.")
        elif cache_key in self._cache:
            logger.debug(f"Cached data returned (cache_key:{cache_key}).")
            return self._cache[cache_key]
        else:
            file_base = os.path.join(self.folder, cache_key)
            file_parquet = file_base + ".parquet"
            file_pickle_dump = file_base + ".pickle.dump"
            try:
                obj = None
                if path.exists(file_parquet):
                    logger.debug(f"Reading cache file: {file_parquet}")
                    obj = pandas.read_parquet(file_parquet)
                elif path.exists(file_pickle_dump):
                    logger.debug(f"Reading cache file: {file_pickle_dump}")
                    with open(file_pickle_dump, 'rb') as f:
                        obj = pickle.load(f)
                else:
                    logger.debug(f"No cache file found: {file_base}.*")
                if obj is not None:
                    self._cache[cache_key] = obj
                    return obj
            except Exception as e:
                logger.error(e)
                logger.debug("Cannot read file from cache.")
        if retriever:
            logger.debug("Computing from source")
            obj = retriever()
            if obj is None:
                logger.debug("None object returned from retriever function for key " + cache_key)
                return None
            self._add_to_cache(cache_key, obj)
            return obj
        else:
            logger.debug("Object not retrieved from cache and no retriever function given.")
            return None

    def get_cache_key(self, s):
        return "PYLEVYTOOLS_CACHE_" + self._escape_str(s)

    def _escape_str(self, s):
        return "".join(x for x in str(s).replace("/", "_") if x.isalnum() or x == "_")


class CachedDecorator(object):
    """
    Caches the result of a pure function under a digest of its arguments.
    Falls back to calling the function when no cache is configured.
    """

    def __init__(self, cache=None, cache_key=None):
        self.cache_key = cache_key
        self.cache = cache

    def __call__(self, fn):
        @functools.wraps(fn)
        def decorated(*args, **kwargs):
            cache = self.cache if self.cache else get_env_manager().get_cache()
            if cache is None:
                return fn(*args, **kwargs)

            def retriever():
                return fn(*args, **kwargs)

            key = (str(fn.__module__) + str(fn.__name__) + str(self.cache_key) + repr((args, sorted(kwargs.items()))))
            return cache.get_from_cache(fn.__name__ + "_" + get_text_hexdigest(key.encode('utf-8')), retriever=retriever)

        return decorated
