"""Statevector kernel backend selection.

The compiled Cython core is preferred when the extension built; otherwise the
NumPy reference implementation is used. Both expose the same five kernels.
Set ``QPACK_BACKEND=reference`` to force the fallback (used by the backend
equivalence tests and the benchmark).
"""

import os

from qpack.backends import reference

__all__ = [
    "BACKEND",
    "apply_1q",
    "apply_cz",
    "apply_phase",
    "apply_phase_table",
    "apply_rx_all",
    "prob_one",
    "get_backend",
]


def get_backend(name: str | None = None):
    """Return (module, label) for the requested backend.

    ``name=None`` resolves to the QPACK_BACKEND environment variable, then to
    the compiled core if importable, then to the reference implementation.
    """
    if name is None:
        name = os.environ.get("QPACK_BACKEND", "").strip().lower() or None
    if name in (None, "compiled"):
        try:
            from qpack.backends import _core

            return _core, "compiled"
        except ImportError:
            if name == "compiled":
                raise
    if name in (None, "reference"):
        return reference, "reference"
    raise ValueError(f"unknown backend {name!r}")


_impl, BACKEND = get_backend()

apply_phase = _impl.apply_phase
apply_phase_table = _impl.apply_phase_table
apply_rx_all = _impl.apply_rx_all
apply_1q = _impl.apply_1q
apply_cz = _impl.apply_cz
prob_one = _impl.prob_one
