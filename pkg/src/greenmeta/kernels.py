"""Backend selection for the numeric kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module takes over. Setting the environment
variable ``GREENMETA_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GREENMETA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def available_backends():
    """Names of the kernel modules importable in this environment."""
    names = {"python": _pykernels}
    try:
        from . import _ckernels
        names["cython"] = _ckernels
    except ImportError:
        pass
    return names


def _vec(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def pack_bits(values, widths):
    return _impl.pack_bits(values, widths)


def unpack_bits(word, widths):
    return _impl.unpack_bits(word, widths)


def akima_node_slopes(x, y):
    if _impl is _pykernels:
        return np.asarray(_pykernels.akima_node_slopes(list(map(float, x)),
                                                       list(map(float, y))))
    return _impl.akima_node_slopes(_vec(x), _vec(y))


def hermite_eval(x, y, t, xq):
    if _impl is _pykernels:
        return np.asarray(_pykernels.hermite_eval(
            _vec(x).tolist(), _vec(y).tolist(), _vec(t).tolist(),
            _vec(xq).tolist()))
    return _impl.hermite_eval(_vec(x), _vec(y), _vec(t), _vec(xq))


def trapezoid(values, dx):
    if _impl is _pykernels:
        return _pykernels.trapezoid(_vec(values).tolist(), float(dx))
    return _impl.trapezoid(_vec(values), float(dx))


# Below this many rows the numpy conversion costs more than the compiled loop
# saves (see benchmarks/bench_kernels.py).
SMALL_TABLE = 8


def lagrangian_argmin(table, coefficients, lambda_rate, lambda_energy):
    """``table`` rows are ``(distortion, rate, count_1, ..., count_N)``."""
    small = not isinstance(table, np.ndarray) and len(table) <= SMALL_TABLE
    if _impl is _pykernels or small:
        return _pykernels.lagrangian_argmin(table, coefficients,
                                            float(lambda_rate),
                                            float(lambda_energy))
    return _impl.lagrangian_argmin(np.array(table, dtype=np.float64, ndmin=2),
                                   _vec(coefficients), float(lambda_rate),
                                   float(lambda_energy))
