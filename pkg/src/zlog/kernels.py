"""Kernel selection: compiled extension if available, numpy fallback otherwise.

``zlog._kernels`` is an optional Cython extension carrying the two hot loops
(meromorphic-tail cloud evaluation and finite-field enumeration).  When it is
missing -- no compiler at install time, or the environment variable
``ZLOG_PURE=1`` forces it off -- the numpy implementations in
``zlog._kernels_py`` take over.  Both expose the same functions with the same
semantics; ``IMPLEMENTATION`` says which one won.
"""

from __future__ import annotations

import os

if os.environ.get("ZLOG_PURE") == "1":
    from zlog import _kernels_py as _impl
else:
    try:
        from zlog import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from zlog import _kernels_py as _impl  # type: ignore[no-redef]

IMPLEMENTATION: str = _impl.IMPLEMENTATION
cloud_eval = _impl.cloud_eval
count_zero_locus = _impl.count_zero_locus
