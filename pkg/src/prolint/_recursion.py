"""Recursion headroom for walking deeply nested terms."""

from __future__ import annotations

import contextlib
import sys
from collections.abc import Iterator

# Long right-nested conjunctions recurse once per operator.
DEEP_RECURSION_LIMIT = 50_000


@contextlib.contextmanager
def deep_recursion(limit: int = DEEP_RECURSION_LIMIT) -> Iterator[None]:
    """Temporarily raise the interpreter recursion limit to at least `limit`."""
    previous = sys.getrecursionlimit()
    sys.setrecursionlimit(max(previous, limit))
    try:
        yield
    finally:
        sys.setrecursionlimit(previous)
