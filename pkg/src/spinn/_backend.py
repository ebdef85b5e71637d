"""Pick the training kernels: compiled ``_core`` when importable, else ``_pyfit``.

Set ``SPINN_BACKEND=python`` to force the fallback, or ``compiled`` to fail
loudly when the extension is missing.
"""
import os

from . import _pyfit

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_choice = os.environ.get("SPINN_BACKEND", "").strip().lower()
if _choice == "compiled" and _core is None:
    raise ImportError("SPINN_BACKEND=compiled but spinn._core is not built")

kernels = _pyfit if _choice == "python" or _core is None else _core
NAME = "compiled" if kernels is _core else "python"


def get(name: str | None = None):
    """Kernel module by name (``None`` for the import-time default)."""
    if name is None:
        return kernels
    if name == "python":
        return _pyfit
    if name == "compiled":
        if _core is None:
            raise ImportError("compiled kernels are not available")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    return ["python"] + (["compiled"] if _core is not None else [])
