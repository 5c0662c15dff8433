class AttrDict(object):
    """
    Attribute-style bag of named values. Used for numerical settings and for the
    closed forms a reference model provides.
    """
    missing_error = AttributeError

    def __init__(self, initializer=None, **values):
        self._data = dict()
        self._initializer = initializer
        self._is_initialized = False if initializer is not None else True
        for k, v in values.items():
            self._add_attr(k, v)

    def _initialize(self):
        if self._initializer:
            self._initializer(self)

    def _ensure_initialized(self):
        if not self._is_initialized:
            self._is_initialized = True
            self._initialize()

    def get(self, key):
        return self.__getattr__(key)

    def __repr__(self):
        self._ensure_initialized()
        ret = ""
        for k, v in self._data.items():
            ret += str(k) + "\n" + "\n".join(["  " + str(i) for i in repr(v).splitlines()]) + "\n"
        return ret

    def __contains__(self, key):
        self._ensure_initialized()
        return key in self._data

    def keys(self):
        self._ensure_initialized()
        return self._data.keys()

    def items(self):
        self._ensure_initialized()
        return self._data.items()

    def to_dict(self):
        return dict(self.items())

    def __getattr__(self, key):
        if key.startswith("_"):
            raise AttributeError(key)
        self._ensure_initialized()
        if key in self._data:
            return self._data[key]
        else:
            raise self.missing_error(f"{key} does not exists. Available keys: " + str(list(self._data.keys())))

    def _add_attr(self, key, value):
        self._data[key] = value
        setattr(self, key, value)
