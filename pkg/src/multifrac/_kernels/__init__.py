"""Hot numerical kernels.

The compiled extension ``_core`` is used when it imports; otherwise the
numpy twins in ``_fallback`` are used.  Set ``MULTIFRAC_PURE_PYTHON=1`` to
force the fallback.  ``BACKEND`` names the active implementation.
"""
import os

from multifrac._kernels import _fallback

_NAMES = ("holder_sup", "power_row_weights", "varexp_weights", "volterra_march", "kernel_f_pairs")

if os.environ.get("MULTIFRAC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from multifrac._kernels import _core as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback
        BACKEND = "python"

holder_sup = _impl.holder_sup
power_row_weights = _impl.power_row_weights
varexp_weights = _impl.varexp_weights
volterra_march = _impl.volterra_march
kernel_f_pairs = _impl.kernel_f_pairs


def implementations():
    """Map backend name -> module, for comparison tests and benchmarks."""
    impls = {"python": _fallback}
    try:
        from multifrac._kernels import _core
        impls["compiled"] = _core
    except ImportError:
        pass
    return impls
