"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the NumPy
fallback. Set ``LAYERSPLIT_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["cython"] = _compiled

if _compiled is not None and os.environ.get("LAYERSPLIT_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def use_backend(name):
    """Switch the active backend at runtime; returns the previous name."""
    global BACKEND, _impl
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    previous, BACKEND, _impl = BACKEND, name, BACKENDS[name]
    return previous


def shrink(a, w):
    return _impl.shrink(a, w)


def circ_filter(x, taps, anchor, adjoint, out, accumulate=False):
    return _impl.circ_filter(x, taps, anchor, adjoint, out, accumulate)


def uv_step(g, u, v, y1, y2, fli, fla, alpha, beta, gamma, mu, tden):
    return _impl.uv_step(g, u, v, y1, y2, fli, fla, alpha, beta, gamma, mu, tden)
