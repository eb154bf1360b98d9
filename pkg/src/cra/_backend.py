"""Select the compiled kernel core, falling back to pure numpy.

Set CRA_FORCE_PURE=1 to skip the compiled extension (used by the benchmark
and for debugging).
"""

import os

if os.environ.get("CRA_FORCE_PURE") == "1":
    from . import _pure as impl
else:
    try:
        from . import _core as impl  # type: ignore[no-redef]
    except ImportError:
        from . import _pure as impl  # type: ignore[no-redef]

BACKEND = "compiled" if impl.__name__.endswith("_core") else "pure"

lambda_k = impl.lambda_k
srelu_spline_apply = impl.srelu_spline_apply
