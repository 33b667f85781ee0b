"""Numerical kernel backend selection.

The compiled extension is preferred when present; setting the environment
variable PHASEFLOW_PURE=1 forces the numpy reference implementation.  The
active choice is exposed as `BACKEND` ("compiled" or "python") and recorded
in run metadata.
"""

import os

from . import _pyref

BACKEND = "python"
_impl = _pyref

if not os.environ.get("PHASEFLOW_PURE"):
    try:
        from . import _ext as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

leapfrog_ensemble = _impl.leapfrog_ensemble
gaussian_flow = _impl.gaussian_flow
rho_flow = _impl.rho_flow
benettin = _impl.benettin
bicubic_remap = _impl.bicubic_remap
bicubic_remap_planned = _impl.bicubic_remap_planned

# Plan construction is a one-off numpy computation, not a hot loop, so the
# reference implementation serves both backends.
bicubic_plan = _pyref.bicubic_plan

__all__ = [
    "BACKEND",
    "leapfrog_ensemble",
    "gaussian_flow",
    "rho_flow",
    "benettin",
    "bicubic_remap",
    "bicubic_plan",
    "bicubic_remap_planned",
]
