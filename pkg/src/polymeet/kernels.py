"""Kernel selection: compiled extension when built, pure Python otherwise.

Set POLYMEET_PURE=1 to force the pure module regardless of the build.
"""

import os

if os.environ.get("POLYMEET_PURE") == "1":
    from polymeet import _kernels_py as impl
else:
    try:
        from polymeet import _kernels as impl  # type: ignore[attr-defined]
    except ImportError:
        from polymeet import _kernels_py as impl

COMPILED = impl.COMPILED
orient_sign = impl.orient_sign
cmp_dot_along = impl.cmp_dot_along
