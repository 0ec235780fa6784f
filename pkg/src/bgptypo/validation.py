"""Input coercion helpers shared by the estimators."""
from __future__ import annotations

from typing import Iterable

from .ingest import parse_rib_line
from .paths import RouteEntry, Snapshot, label_for_timestamp
from .scan import TypoCandidate


def check_entries(X) -> tuple[RouteEntry, ...]:
    """Accept a Snapshot, RouteEntry objects or canonical RIB lines."""
    if isinstance(X, Snapshot):
        return X.entries
    if isinstance(X, (str, bytes)):
        raise TypeError("pass an iterable of lines, not a single string")
    out = []
    for item in X:
        if isinstance(item, RouteEntry):
            out.append(item)
        elif isinstance(item, str):
            if item.strip() and not item.startswith("#"):
                out.append(parse_rib_line(item))
        else:
            raise TypeError(f"cannot interpret {type(item).__name__} as a route entry")
    return tuple(out)


def as_snapshot(X, label: str | None = None) -> Snapshot:
    if isinstance(X, Snapshot):
        return X
    entries = check_entries(X)
    if label is None:
        label = label_for_timestamp(entries[0].timestamp) if entries else "1970-01"
    return Snapshot(label, entries)


def check_snapshots(X) -> list[Snapshot]:
    """A single snapshot-like input or a sequence of Snapshot objects."""
    if isinstance(X, Snapshot):
        return [X]
    items = list(X)
    if items and all(isinstance(s, Snapshot) for s in items):
        return items
    return [as_snapshot(items)]


def check_candidates(X: Iterable) -> list[TypoCandidate]:
    items = list(X)
    for c in items:
        if not isinstance(c, TypoCandidate):
            raise TypeError(f"expected TypoCandidate, got {type(c).__name__}")
    return items
