"""Buckling- and yield-aware design of periodic material microstructures."""

import os

# Pin BLAS thread counts before numpy ever loads.  Explicit BLAS settings
# made by the user win; CELLMAT_THREADS only fills the gaps.
_requested = os.environ.get("CELLMAT_THREADS")
if _requested:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _requested)

__version__ = "0.1.0"
