"""Value types for ASNs, IPv4 prefixes, AS paths and routes.

Everything here is immutable; the helpers are pure functions.
"""
from __future__ import annotations

import calendar
import ipaddress
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .exceptions import PathParseError, UnsupportedPathError

_DIGITS = re.compile(r"[0-9]+")
_AS_SET = re.compile(r"\{[0-9, ]*\}")
_ORIGIN_CODES = frozenset("ie?")
_MONTH = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, slots=True)
class AsToken:
    """An ASN as written in the announcement.

    The digit string is kept alongside the value because every typo
    predicate works on the written digits. Values above 2**32 are allowed,
    a missing-space typo produces exactly that.
    """

    text: str
    value: int = field(compare=False, hash=False)

    def __post_init__(self):
        if not self.text or not _DIGITS.fullmatch(self.text):
            raise PathParseError(f"invalid ASN token {self.text!r}")
        if self.value != int(self.text):
            raise ValueError(f"value {self.value} does not match {self.text!r}")

    def __str__(self):
        return self.text

    def is_assignable(self, max_asn: int) -> bool:
        return self.value <= max_asn


def token(text: str | int) -> AsToken:
    """Return the (interned) token for ``text``."""
    return _token(str(text))


@lru_cache(maxsize=1 << 16)
def _token(text: str) -> AsToken:
    if not _DIGITS.fullmatch(text):
        raise PathParseError(f"invalid ASN token {text!r}")
    return AsToken(text, int(text))


@dataclass(frozen=True, slots=True, order=True)
class Prefix:
    """IPv4 prefix stored as (network integer, length)."""

    network: int
    length: int

    def __post_init__(self):
        if not 0 <= self.length <= 32:
            raise ValueError(f"prefix length {self.length} out of range")
        if not 0 <= self.network < 1 << 32:
            raise ValueError(f"network {self.network} out of range")
        if self.network & ((1 << (32 - self.length)) - 1):
            raise ValueError("host bits set below prefix length")

    @classmethod
    def parse(cls, text: str) -> Prefix:
        try:
            net = ipaddress.IPv4Network(text.strip(), strict=True)
        except ValueError as exc:
            raise ValueError(f"invalid IPv4 prefix {text!r}: {exc}") from None
        return cls(int(net.network_address), net.prefixlen)

    def __str__(self):
        return f"{ipaddress.IPv4Address(self.network)}/{self.length}"

    @property
    def last(self) -> int:
        return self.network + self.address_count() - 1

    @property
    def is_default(self) -> bool:
        return self.length == 0

    def address_count(self) -> int:
        return 1 << (32 - self.length)

    def contains(self, other: Prefix) -> bool:
        if other.length < self.length:
            return False
        shift = 32 - self.length
        return (other.network >> shift) == (self.network >> shift)


@dataclass(frozen=True, slots=True)
class AsPath:
    """Ordered ASN sequence, collector side first and origin last.

    Paths carrying an AS_SET keep their normalised text in ``raw`` so they
    can be written back out verbatim; they are never scanned.
    """

    tokens: tuple[AsToken, ...]
    contains_as_set: bool = False
    raw: str | None = None

    def __str__(self):
        if self.contains_as_set and self.raw is not None:
            return self.raw
        return " ".join(t.text for t in self.tokens)

    def __len__(self):
        return len(self.tokens)

    def origin(self) -> AsToken:
        if not self.tokens:
            raise UnsupportedPathError("empty path has no origin")
        return self.tokens[-1]

    def replace_tokens(self, tokens: Iterable[AsToken]) -> AsPath:
        return AsPath(tuple(tokens))


def parse_path(text: str) -> AsPath:
    """Parse a whitespace-separated AS path.

    A trailing origin code (``i``, ``e`` or ``?``) is dropped. ``{a,b}``
    groups mark the path as containing an AS_SET without expanding them.
    """
    # AS_SET groups may contain spaces after commas; pull them out first
    sets = _AS_SET.findall(text)
    flat = _AS_SET.sub(" {} ", text) if sets else text
    parts = flat.split()
    if parts and parts[-1] in _ORIGIN_CODES:
        parts.pop()
    if not parts:
        raise PathParseError("empty AS path")
    tokens = []
    raw_parts = []
    set_iter = iter(sets)
    for part in parts:
        if part == "{}" and sets:
            raw_parts.append(next(set_iter).replace(" ", ""))
            continue
        if not _DIGITS.fullmatch(part):
            raise PathParseError(f"invalid token {part!r} in path {text!r}")
        tokens.append(token(part))
        raw_parts.append(part)
    if sets:
        return AsPath(tuple(tokens), True, " ".join(raw_parts))
    return AsPath(tuple(tokens))


def collapse_runs(path: AsPath) -> list[tuple[AsToken, int]]:
    """Collapse maximal runs of identical adjacent tokens into (token, count)."""
    if path.contains_as_set:
        raise UnsupportedPathError("cannot collapse a path containing an AS_SET")
    runs: list[tuple[AsToken, int]] = []
    for tok in path.tokens:
        if runs and runs[-1][0].text == tok.text:
            runs[-1] = (tok, runs[-1][1] + 1)
        else:
            runs.append((tok, 1))
    return runs


def run_starts(runs: Sequence[tuple[AsToken, int]]) -> list[int]:
    """Token index at which each run begins."""
    starts, pos = [], 0
    for _, count in runs:
        starts.append(pos)
        pos += count
    return starts


def looped_values(path: AsPath) -> set[int]:
    """ASN values that appear in two or more separate runs."""
    seen: set[int] = set()
    looped: set[int] = set()
    for tok, _ in collapse_runs(path):
        if tok.value in seen:
            looped.add(tok.value)
        seen.add(tok.value)
    return looped


def has_loop(path: AsPath) -> bool:
    if path.contains_as_set:
        raise UnsupportedPathError("cannot check loops on a path containing an AS_SET")
    return bool(looped_values(path))


def address_count(prefixes: Iterable[Prefix], union: bool = True) -> int:
    """Number of IPv4 addresses covered by ``prefixes``.

    With ``union`` (the default) overlapping prefixes are counted once;
    otherwise per-prefix sizes are summed.
    """
    prefixes = set(prefixes)
    if not union:
        return sum(p.address_count() for p in prefixes)
    total = 0
    cur_start = cur_end = None
    for p in sorted(prefixes):
        start, end = p.network, p.last
        if cur_end is None or start > cur_end + 1:
            if cur_end is not None:
                total += cur_end - cur_start + 1
            cur_start, cur_end = start, end
        elif end > cur_end:
            cur_end = end
    if cur_end is not None:
        total += cur_end - cur_start + 1
    return total


@dataclass(frozen=True, slots=True)
class RouteEntry:
    timestamp: int
    collector: str
    peer_asn: AsToken
    prefix: Prefix
    path: AsPath

    def __post_init__(self):
        if not self.collector:
            raise ValueError("collector id must be non-empty")

    def with_path(self, path: AsPath) -> RouteEntry:
        return RouteEntry(self.timestamp, self.collector, self.peer_asn, self.prefix, path)

    def to_line(self) -> str:
        return f"{self.timestamp}|{self.collector}|{self.peer_asn}|{self.prefix}|{self.path}"


def check_month_label(label: str) -> str:
    m = _MONTH.match(label)
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise ValueError(f"snapshot label {label!r} is not a YYYY-MM month")
    return label


def label_for_timestamp(ts: int) -> str:
    t = time.gmtime(ts)
    return f"{t.tm_year:04d}-{t.tm_mon:02d}"


def month_start(label: str) -> int:
    year, month = map(int, check_month_label(label).split("-"))
    return calendar.timegm((year, month, 1, 0, 0, 0))


@dataclass(frozen=True)
class Snapshot:
    """One month of route entries."""

    label: str
    entries: tuple[RouteEntry, ...]
    collectors: frozenset[str] = frozenset()
    skipped: int = 0

    def __post_init__(self):
        check_month_label(self.label)
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = frozenset(e.collector for e in self.entries)
        if not self.collectors:
            object.__setattr__(self, "collectors", seen)
        elif not seen <= self.collectors:
            raise ValueError("entry collectors missing from snapshot collector set")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def active_origins(self) -> frozenset[int]:
        """ASN values originating at least one prefix in this snapshot."""
        return frozenset(
            e.path.tokens[-1].value for e in self.entries if e.path.tokens
        )
