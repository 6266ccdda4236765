"""Stepping-kernel selection: compiled extension if present, numpy otherwise.

``advance`` is the kernel the simulator uses; ``BACKEND`` names which one
was picked so runs can record it.  Both implementations share one contract
(see ``_stepper_py.advance``) and the test suite holds them to it.
"""

from . import _stepper_py

try:
    from . import _stepper_cy
except ImportError:  # extension not built; the numpy path is complete
    _stepper_cy = None

if _stepper_cy is not None:
    advance = _stepper_cy.advance
    BACKEND = "cython"
else:
    advance = _stepper_py.advance
    BACKEND = "python"


def available_backends() -> dict:
    """Name -> kernel callable, for equivalence tests and benchmarks."""
    out = {"python": _stepper_py.advance}
    if _stepper_cy is not None:
        out["cython"] = _stepper_cy.advance
    return out
