"""cqmine: levelwise discovery of frequent conjunctive queries and rules."""

from __future__ import annotations

__version__ = "0.1.0"
