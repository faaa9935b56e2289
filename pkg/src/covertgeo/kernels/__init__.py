"""Hot loops, compiled with Cython when available.

The pure numpy fallback is used when the extension was not built or when
``COVERTGEO_PURE_PYTHON=1`` is set before import.  ``BACKEND`` reports which
one is active.
"""

import os

from . import _fallback

if os.environ.get("COVERTGEO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

shot_noise_sums = _impl.shot_noise_sums
disk_shot_noise_sums = _impl.disk_shot_noise_sums
threshold_offsets = _impl.threshold_offsets

__all__ = ["BACKEND", "disk_shot_noise_sums", "shot_noise_sums", "threshold_offsets"]
