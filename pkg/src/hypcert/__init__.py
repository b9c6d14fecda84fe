"""Finite-volume reference solvers, compositional network surrogates and certified error bounds."""

import os

# HYPCERT_THREADS pins the BLAS thread pools; it must be read before numpy loads
_threads = os.environ.get("HYPCERT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"
