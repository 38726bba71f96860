"""Select the compiled kernels when importable, else the pure-Python ones.

Set ``SMALLDEV_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("SMALLDEV_PURE_PYTHON"):
    from smalldev._purepy import enumerate_below, samuels_terms

    BACKEND = "python"
else:
    try:
        from smalldev._kernels import enumerate_below, samuels_terms

        BACKEND = "cython"
    except ImportError:
        from smalldev._purepy import enumerate_below, samuels_terms

        BACKEND = "python"

__all__ = ["BACKEND", "enumerate_below", "samuels_terms"]
