"""Reachability kernel selection: compiled extension when available,
pure Python otherwise.  `BACKEND` reports which one is active."""

from . import _pure

try:
    from . import _speedups
    shortest_error_path = _speedups.shortest_error_path
    BACKEND = "compiled"
except ImportError:  # extension not built
    shortest_error_path = _pure.shortest_error_path
    BACKEND = "pure"

__all__ = ["shortest_error_path", "BACKEND", "_pure"]
