"""Backend selection for the sweep kernel.

The compiled extension is used when it was built; otherwise, or when
``WTSDIST_PURE=1`` is set, the pure-Python version is used.  Both are
exposed by name so they can be compared.
"""

import os

from ._pykernels import sweep_max as python_sweep_max

try:
    from ._kernels import sweep_max as compiled_sweep_max
except ImportError:  # extension not built
    compiled_sweep_max = None

if compiled_sweep_max is not None and not os.environ.get("WTSDIST_PURE"):
    sweep_max = compiled_sweep_max
    BACKEND = "cython"
else:
    sweep_max = python_sweep_max
    BACKEND = "python"
