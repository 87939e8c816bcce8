"""Explicit 2-descent on y^2 = x(x-1)(x+p^2) for the family p = 1 mod 8, (p^2+1)/2 prime."""

import hashlib
from functools import lru_cache
from pathlib import Path

__version__ = "0.1.0"


@lru_cache(maxsize=None)
def code_version() -> str:
    """Short hash of the package sources; cache entries never cross versions."""
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]
