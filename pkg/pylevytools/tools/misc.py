import functools
import time

from pylevytools import get_default_logger

logger = get_default_logger()


def get_text_hexdigest(text):
    import hashlib
    md5_hash = hashlib.md5()
    md5_hash.update(text)
    digest = md5_hash.hexdigest()
    return str(digest)


class ProfileDecorator(object):
    """
    Records wall-clock time of the decorated function in `timings` under `name`.
    """

    def __init__(self, timings, name=None):
        self.timings = timings
        self.name = name

    def __call__(self, fn):
        name = self.name or fn.__name__

        @functools.wraps(fn)
        def wrap(*args, **kwargs):
            started_at = time.time()
            try:
                return fn(*args, **kwargs)
            finally:
                elapsed = time.time() - started_at
                self.timings[name] = self.timings.get(name, 0.0) + elapsed
                logger.debug("Profile func:" + name + " Time (sec):" + str(round(elapsed, 3)))

        return wrap


def batch(iterable, n=1):
    l = len(iterable)
    for ndx in range(0, l, n):
        yield iterable[ndx:min(ndx + n, l)]


def str_to_list(p, sep=","):
    if p is None:
        return []
    if isinstance(p, str):
        p = [i.strip() for i in p.split(sep) if i.strip()]
    return list(p)


def float_list(p, sep=","):
    return [float(i) for i in str_to_list(p, sep)]
