"""Loading RIB snapshots and the side databases used for classification."""
from __future__ import annotations

import io
import logging
import os
import re
from dataclasses import dataclass, field
from typing import BinaryIO, Callable, Iterable, Iterator, Mapping

from .exceptions import CorruptInputError, DatabaseFormatError, DuplicateKeyError
from .paths import (
    Prefix,
    RouteEntry,
    Snapshot,
    check_month_label,
    label_for_timestamp,
    parse_path,
    token,
)

log = logging.getLogger(__name__)

DEFAULT_ERROR_RATE = 0.01
# below this many data lines the error-rate limit is not enforced
MIN_LINES_FOR_RATE = 100

_COUNTRY = re.compile(r"^[A-Z]{2}$")
_LABEL_IN_NAME = re.compile(r"(\d{4})-?(\d{2})")


def parse_rib_line(line: str) -> RouteEntry:
    """Parse ``timestamp|collector|peer_asn|prefix|as_path``."""
    parts = line.rstrip("\r\n").split("|")
    if len(parts) != 5:
        raise ValueError(f"expected 5 fields, got {len(parts)}")
    ts, collector, peer, prefix, path = parts
    return RouteEntry(
        timestamp=int(ts),
        collector=collector.strip(),
        peer_asn=token(peer.strip()),
        prefix=Prefix.parse(prefix),
        path=parse_path(path),
    )


def _read_canonical(source: BinaryIO, max_error_rate: float):
    entries = []
    bad = 0
    total = 0
    text = io.TextIOWrapper(source, encoding="utf-8", newline=None)
    for lineno, line in enumerate(text, 1):
        if not line.strip() or line.startswith("#"):
            continue
        total += 1
        try:
            entries.append(parse_rib_line(line))
        except ValueError as exc:
            bad += 1
            log.debug("line %d skipped: %s", lineno, exc)
    text.detach()
    if total >= MIN_LINES_FOR_RATE and bad / total > max_error_rate:
        raise CorruptInputError(
            f"{bad} of {total} lines malformed, above the {max_error_rate:.2%} limit"
        )
    return entries, bad


def _read_mrt(source: BinaryIO, max_error_rate: float):
    from .mrt import read_table_dump_v2

    return read_table_dump_v2(source, max_error_rate=max_error_rate)


# adapter name -> callable(stream, max_error_rate) -> (entries, skipped)
ADAPTERS: dict[str, Callable] = {
    "canonical": _read_canonical,
    "mrt": _read_mrt,
}


def register_adapter(name: str, reader: Callable) -> None:
    ADAPTERS[name] = reader


def guess_label(name: str | os.PathLike | None, entries=()) -> str:
    """Month label taken from a file name, else from the first timestamp."""
    if name is not None:
        for m in _LABEL_IN_NAME.finditer(os.path.basename(os.fspath(name))):
            label = f"{m.group(1)}-{m.group(2)}"
            try:
                return check_month_label(label)
            except ValueError:
                continue
    for e in entries:
        return label_for_timestamp(e.timestamp)
    return "1970-01"


def load_snapshot(
    source: BinaryIO | str | os.PathLike,
    format: str = "canonical",
    label: str | None = None,
    max_error_rate: float = DEFAULT_ERROR_RATE,
) -> Snapshot:
    """Read one snapshot from a byte stream or a file path.

    Malformed lines are skipped and counted in ``Snapshot.skipped``. A
    ``CorruptInputError`` is raised when the malformed fraction exceeds
    ``max_error_rate`` on inputs of at least ``MIN_LINES_FOR_RATE`` lines.
    """
    if isinstance(source, (str, os.PathLike)):
        return open_snapshot(source, format=format, label=label, max_error_rate=max_error_rate)
    try:
        reader = ADAPTERS[format]
    except KeyError:
        raise ValueError(f"unknown snapshot format {format!r}") from None
    entries, skipped = reader(source, max_error_rate)
    if not entries:
        log.warning("snapshot %s contains no routes", label or getattr(source, "name", "?"))
    if skipped:
        log.warning("%d malformed lines skipped", skipped)
    if label is None:
        label = guess_label(getattr(source, "name", None), entries)
    return Snapshot(label, tuple(entries), skipped=skipped)


def open_snapshot(path: str | os.PathLike, format: str | None = None, **kwargs) -> Snapshot:
    """Open ``path`` (optionally .gz/.bz2 compressed) and load it."""
    import bz2
    import gzip

    path = os.fspath(path)
    if format is None:
        format = "mrt" if re.search(r"\.(mrt|rib|dump)(\.|$)", os.path.basename(path)) else "canonical"
    if path.endswith(".gz"):
        opener = gzip.open
    elif path.endswith(".bz2"):
        opener = bz2.open
    else:
        opener = open
    kwargs.setdefault("label", guess_label(path) if _LABEL_IN_NAME.search(os.path.basename(path)) else None)
    with opener(path, "rb") as fh:
        snap = load_snapshot(fh, format=format, **kwargs)
    return snap


def _tsv_rows(lines: Iterable[str], source: str | None) -> Iterator[tuple[int, list[str]]]:
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DatabaseFormatError(
                f"expected 2 tab-separated fields, got {len(fields)}", lineno, source
            )
        yield lineno, [f.strip() for f in fields]


def _parse_asn(text: str, lineno: int, source) -> int:
    if not text.isdigit():
        raise DatabaseFormatError(f"invalid ASN {text!r}", lineno, source)
    return int(text)


def _lines(file) -> tuple[Iterable[str], str | None]:
    if isinstance(file, (str, os.PathLike)):
        with open(file, encoding="utf-8") as fh:
            return fh.read().splitlines(), os.fspath(file)
    if isinstance(file, bytes):
        return file.decode("utf-8").splitlines(), None
    data = file.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines(), getattr(file, "name", None)


class OwnershipDb:
    """Prefix to owner-ASN mapping with longest-prefix-match lookup."""

    def __init__(self, entries: Mapping[Prefix, Iterable[int]] | None = None):
        by_len: dict[int, dict[int, frozenset[int]]] = {}
        for prefix, owners in (entries or {}).items():
            slot = by_len.setdefault(prefix.length, {})
            slot[prefix.network] = slot.get(prefix.network, frozenset()) | frozenset(owners)
        self._by_len = by_len
        self._lengths = sorted(by_len, reverse=True)

    def __len__(self):
        return sum(len(v) for v in self._by_len.values())

    def items(self) -> Iterator[tuple[Prefix, frozenset[int]]]:
        for length in sorted(self._by_len):
            for net, owners in sorted(self._by_len[length].items()):
                yield Prefix(net, length), owners

    def lookup(self, prefix: Prefix) -> frozenset[int] | None:
        for length in self._lengths:
            if length > prefix.length:
                continue
            mask = ((1 << length) - 1) << (32 - length)
            owners = self._by_len[length].get(prefix.network & mask)
            if owners is not None:
                return owners
        return None


def longest_prefix_owner(db: OwnershipDb, prefix: Prefix) -> frozenset[int] | None:
    return db.lookup(prefix)


@dataclass(frozen=True)
class AsnRegistry:
    countries: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for asn, cc in self.countries.items():
            if not _COUNTRY.match(cc):
                raise ValueError(f"country code {cc!r} for AS{asn} is not ISO alpha-2")

    def __contains__(self, asn: int) -> bool:
        return asn in self.countries

    def __len__(self):
        return len(self.countries)

    def country(self, asn: int) -> str | None:
        return self.countries.get(asn)


@dataclass(frozen=True)
class CountryAdjacency:
    pairs: frozenset[frozenset[str]] = frozenset()

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> CountryAdjacency:
        return cls(frozenset(frozenset((a.upper(), b.upper())) for a, b in pairs))

    def adjacent(self, a: str, b: str) -> bool:
        return a == b or frozenset((a, b)) in self.pairs


@dataclass(frozen=True)
class UpstreamWhitelist:
    upstreams: Mapping[int, frozenset[int]] = field(default_factory=dict)
    small_asn_range: tuple[int, int] = (1, 12)

    def __post_init__(self):
        lo, hi = self.small_asn_range
        for asn in self.upstreams:
            if not lo <= asn <= hi:
                raise ValueError(f"whitelist key AS{asn} outside small-ASN range {lo}:{hi}")

    def __getitem__(self, asn: int) -> frozenset[int]:
        return self.upstreams.get(asn, frozenset())

    def __len__(self):
        return len(self.upstreams)

    def allows(self, origin: int, upstream: int) -> bool:
        return upstream in self.upstreams.get(origin, ())

    def rows(self) -> list[tuple[int, int]]:
        return sorted((k, u) for k, ups in self.upstreams.items() for u in ups)


def load_ownership(file) -> OwnershipDb:
    lines, src = _lines(file)
    merged: dict[Prefix, set[int]] = {}
    for lineno, (pfx, asn) in _tsv_rows(lines, src):
        try:
            prefix = Prefix.parse(pfx)
        except ValueError as exc:
            raise DatabaseFormatError(str(exc), lineno, src) from None
        merged.setdefault(prefix, set()).add(_parse_asn(asn, lineno, src))
    return OwnershipDb(merged)


def load_registry(file) -> AsnRegistry:
    lines, src = _lines(file)
    countries: dict[int, str] = {}
    for lineno, (asn_text, cc) in _tsv_rows(lines, src):
        asn = _parse_asn(asn_text, lineno, src)
        cc = cc.upper()
        if not _COUNTRY.match(cc):
            raise DatabaseFormatError(f"invalid country code {cc!r}", lineno, src)
        if asn in countries and countries[asn] != cc:
            raise DuplicateKeyError(
                f"AS{asn} registered to both {countries[asn]} and {cc}", lineno, src
            )
        countries[asn] = cc
    return AsnRegistry(countries)


def load_adjacency(file) -> CountryAdjacency:
    lines, src = _lines(file)
    pairs = []
    for lineno, (a, b) in _tsv_rows(lines, src):
        a, b = a.upper(), b.upper()
        if not (_COUNTRY.match(a) and _COUNTRY.match(b)):
            raise DatabaseFormatError(f"invalid country pair {a!r},{b!r}", lineno, src)
        pairs.append((a, b))
    return CountryAdjacency.from_pairs(pairs)


def load_whitelist(file, small_asn_range: tuple[int, int] = (1, 12)) -> UpstreamWhitelist:
    lines, src = _lines(file)
    ups: dict[int, set[int]] = {}
    lo, hi = small_asn_range
    for lineno, (small, up) in _tsv_rows(lines, src):
        key = _parse_asn(small, lineno, src)
        if not lo <= key <= hi:
            raise DatabaseFormatError(f"AS{key} outside small-ASN range {lo}:{hi}", lineno, src)
        ups.setdefault(key, set()).add(_parse_asn(up, lineno, src))
    return UpstreamWhitelist({k: frozenset(v) for k, v in ups.items()}, small_asn_range)
