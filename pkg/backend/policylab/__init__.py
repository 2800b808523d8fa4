"""Fixed-budget policy choice laboratory for batched Bernoulli experiments."""

from importlib import metadata

__all__ = ["__version__"]


def __getattr__(name: str) -> str:
    if name == "__version__":
        try:
            return metadata.version("policy-choice-lab")
        except metadata.PackageNotFoundError:  # pragma: no cover - source checkout
            return "0.0.0"
    raise AttributeError(name)
