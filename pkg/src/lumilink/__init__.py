"""Desk-scale simulator for a small-satellite LED downlink and PV-cell laser uplink."""
from ._accel import USE_NUMBA, backend_name

__version__ = "0.1.0"
__all__ = ["USE_NUMBA", "backend_name", "__version__"]
