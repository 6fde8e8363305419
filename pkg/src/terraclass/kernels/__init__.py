"""Hot per-pixel kernels with two interchangeable backends.

``_cy`` is a compiled Cython extension; ``_py`` is a NumPy implementation of
the same contracts. The compiled backend is preferred when importable; set
``TERRACLASS_KERNELS=py`` (or ``cy``) to force one. Both backends produce
identical labels for the band counts this toolkit targets (accumulation
order is matched, see the per-function notes in ``_py``).
"""

import os

from . import _py

_backends = {"py": _py}

try:
    from . import _cy
    _backends["cy"] = _cy
except ImportError:
    _cy = None

_requested = os.environ.get("TERRACLASS_KERNELS", "auto").strip().lower()
if _requested in ("auto", ""):
    _current = "cy" if "cy" in _backends else "py"
elif _requested in _backends:
    _current = _requested
elif _requested == "cy":
    raise ImportError("TERRACLASS_KERNELS=cy but the compiled kernel extension is not built")
else:
    raise ValueError(f"TERRACLASS_KERNELS must be 'auto', 'py' or 'cy', got {_requested!r}")


def available_backends() -> list[str]:
    return sorted(_backends)


def backend_name() -> str:
    return _current


def get():
    """Return the active kernel backend module."""
    return _backends[_current]


def set_backend(name: str) -> None:
    """Switch the active backend (used by tests and the benchmark)."""
    global _current
    if name not in _backends:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    _current = name
