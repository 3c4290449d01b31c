"""Code identity for reproducibility records."""
from __future__ import annotations

import hashlib
from pathlib import Path

from . import __version__

# digest prefix of the requirements document this build implements
REQUIREMENTS_DIGEST = "31eaed6139a9f4f9"


def source_hash() -> str:
    """sha256 over the package's .py sources, in sorted file order."""
    h = hashlib.sha256()
    root = Path(__file__).resolve().parent
    for f in sorted(root.glob("*.py")):
        h.update(f.name.encode())
        h.update(b"\0")
        h.update(f.read_bytes())
    return h.hexdigest()


def build_info() -> dict:
    return {"version": __version__, "build_hash": source_hash(), "requirements": REQUIREMENTS_DIGEST}
