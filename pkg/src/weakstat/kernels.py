"""Select the sampling kernel backend at import time.

The compiled ``_kernels`` extension is used when it was built; otherwise,
or when ``WEAKSTAT_PURE_PYTHON=1`` is set, the numpy implementation in
``_kernels_py`` is used. Both produce identical counts for the same seed.
"""

import os

from . import _kernels_py

if os.environ.get("WEAKSTAT_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

stream_key = _impl.stream_key
uniforms = _impl.uniforms
count_categorical = _impl.count_categorical
count_two_stage = _impl.count_two_stage

__all__ = ["BACKEND", "stream_key", "uniforms", "count_categorical", "count_two_stage"]
