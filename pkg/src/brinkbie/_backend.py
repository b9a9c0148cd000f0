"""Backend selection for the special-function kernels.

At import time this picks the compiled Cython module when it is available,
otherwise the pure-numpy implementation.  Override with the environment
variable ``BRINKBIE_BACKEND`` set to ``pure`` or ``compiled`` (requesting
``compiled`` when the extension is missing raises at import).
"""

import os

from . import _purespec

_requested = os.environ.get("BRINKBIE_BACKEND", "auto").lower()

if _requested not in ("auto", "pure", "compiled"):
    raise ImportError(f"BRINKBIE_BACKEND={_requested!r}: expected auto, pure or compiled")

impl = _purespec
name = "pure"

if _requested in ("auto", "compiled"):
    try:
        from . import _fastspec
        impl = _fastspec
        name = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise


def get(fname):
    """Return the selected backend's implementation of `fname`, falling back
    to the pure one for functions the compiled module does not export."""
    return getattr(impl, fname, getattr(_purespec, fname))
