"""Backend selection for the hot kernels.

Set ``LUMILINK_NUMBA=0`` in the environment before import to force the pure
numpy path. When numba is not importable the numpy path is used silently.
"""
import os

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

_flag = os.environ.get("LUMILINK_NUMBA", "1").strip().lower()
USE_NUMBA = HAS_NUMBA and _flag not in ("0", "false", "no", "off")


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
