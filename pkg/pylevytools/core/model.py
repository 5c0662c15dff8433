from abc import abstractmethod, ABCMeta

#  Base for everything that is built from configuration:
#  Levy densities and closed-form reference models


class Model(metaclass=ABCMeta):
    def __init__(self, key):
        self.key = key

    @abstractmethod
    def validate_config(self):
        pass

    def parameters(self):
        """Parameters echoed into manifests and cache keys."""
        return {}

    def describe(self):
        return {"key": self.key, **self.parameters()}

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.parameters().items())
        return f"{self.__class__.__name__} - {self.key}({params})"
