"""Small shared helpers: seed derivation and canonical JSON."""

from __future__ import annotations

import hashlib
import json
from typing import Any


def derive_seed(*parts: Any) -> int:
    """Derive a 63-bit seed from arbitrary hashable parts, stably.

    Used to give every fold / subcomponent its own reproducible stream
    without the streams being correlated.
    """
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def canonical_json(obj: Any) -> str:
    """Serialize with sorted keys and stable float repr; used for hashing
    and for byte-stable report artifacts."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def stable_hash(obj: Any) -> str:
    """Hex digest of the canonical JSON form of ``obj``."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
