"""Split-scan kernel with backend selection at import time.

The compiled extension is preferred; the numpy fallback is used when the
extension was not built. Set FAIRTREES_BACKEND=python or =compiled to force
a backend (forcing "compiled" raises if the extension is missing).
"""

import os

_forced = os.environ.get("FAIRTREES_BACKEND")

if _forced == "python":
    from .scan_py import scan_split_candidates

    BACKEND = "python"
elif _forced == "compiled":
    from ._scan import scan_split_candidates  # noqa: F811

    BACKEND = "compiled"
else:
    try:
        from ._scan import scan_split_candidates  # noqa: F811

        BACKEND = "compiled"
    except ImportError:
        from .scan_py import scan_split_candidates  # noqa: F811

        BACKEND = "python"

__all__ = ["scan_split_candidates", "BACKEND"]
