"""Backend selection for the hierarchy stepper.

The compiled extension is used when it imports; setting the environment
variable ``ZENOHEOM_PURE_PYTHON=1`` forces the numpy implementation.
"""

import os

if os.environ.get("ZENOHEOM_PURE_PYTHON", "") not in ("", "0"):
    from ._heom_kernel_py import rhs, rk4_steps

    BACKEND = "numpy"
else:
    try:
        from ._heom_kernel import rhs, rk4_steps

        BACKEND = "cython"
    except ImportError:
        from ._heom_kernel_py import rhs, rk4_steps

        BACKEND = "numpy"

__all__ = ["BACKEND", "rhs", "rk4_steps"]
