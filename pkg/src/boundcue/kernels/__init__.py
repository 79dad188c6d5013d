"""Hot stencil kernels with a numba backend and a pure-numpy fallback.

Backend selection is controlled by the BOUNDCUE_BACKEND environment
variable: "numba" (require JIT), "numpy" (force fallback) or "auto"
(default: numba when importable).  See benchmarks/bench_kernels.py for a
comparison of the two paths.
"""

import os

_choice = os.environ.get("BOUNDCUE_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"BOUNDCUE_BACKEND must be 'auto', 'numba' or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    from . import _numpy_impl as _impl
else:
    try:
        from . import _numba_impl as _impl
    except ImportError:
        if _choice == "numba":
            raise
        from . import _numpy_impl as _impl

BACKEND = _impl.NAME

grad_x = _impl.grad_x
grad_y = _impl.grad_y
grad_x_adj = _impl.grad_x_adj
grad_y_adj = _impl.grad_y_adj
second_x = _impl.second_x
second_y = _impl.second_y
second_x_adj = _impl.second_x_adj
second_y_adj = _impl.second_y_adj
pair_energy_5x5 = _impl.pair_energy_5x5
