"""Candidate extraction: digit-level typo predicates and path scanners."""
from __future__ import annotations

import csv
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .exceptions import UnsupportedPathError
from .ingest import OwnershipDb, UpstreamWhitelist
from .paths import AsToken, RouteEntry, Snapshot, collapse_runs, run_starts

log = logging.getLogger(__name__)

PREPEND_COUNT = 1
SWAP = 2
INSERT_DELETE = 3
MISSING_SPACE = 4
TYPO_TYPES = (PREPEND_COUNT, SWAP, INSERT_DELETE, MISSING_SPACE)

CANDIDATE_FIELDS = ["typo_type", "prefix", "suspect", "reference", "position",
                    "collector", "peer_asn", "path"]


def swap_typo(a: str, b: str) -> bool:
    """True when ``b`` is ``a`` with one adjacent digit pair transposed."""
    if len(a) != len(b) or a == b:
        return False
    diff = [i for i in range(len(a)) if a[i] != b[i]]
    if len(diff) != 2 or diff[1] != diff[0] + 1:
        return False
    i = diff[0]
    return a[i] == b[i + 1] and a[i + 1] == b[i]


def ins_del_typo(a: str, b: str) -> bool:
    """True when one string is the other with a single digit removed."""
    if len(a) < len(b):
        a, b = b, a
    if len(a) - len(b) != 1:
        return False
    i = 0
    while i < len(b) and a[i] == b[i]:
        i += 1
    return a[i + 1:] == b[i:]


def missing_space_typo(a: str, b: str) -> bool:
    """True when one string is the other written twice without a gap."""
    return a != b and (a == b + b or b == a + a)


# checked in this order; the first match decides the type
PAIR_PREDICATES = (
    (MISSING_SPACE, missing_space_typo),
    (SWAP, swap_typo),
    (INSERT_DELETE, ins_del_typo),
)


def pair_type(a: str, b: str) -> int | None:
    for typo_type, pred in PAIR_PREDICATES:
        if pred(a, b):
            return typo_type
    return None


@dataclass(frozen=True)
class ScanConfig:
    small_asn_range: tuple[int, int] = (1, 12)
    max_assigned_asn: int = 500_000
    min_run_for_type1: int = 1

    def __post_init__(self):
        lo, hi = self.small_asn_range
        if lo < 1 or hi < lo:
            raise ValueError(f"invalid small-ASN range {lo}:{hi}")
        if self.max_assigned_asn < 1:
            raise ValueError("max_assigned_asn must be >= 1")
        if self.min_run_for_type1 < 1:
            raise ValueError("min_run_for_type1 must be >= 1")

    def is_small(self, asn: int) -> bool:
        lo, hi = self.small_asn_range
        return lo <= asn <= hi


class TypoKey(NamedTuple):
    """Identity of a typo across snapshots."""

    typo_type: int
    suspect: str
    reference: str


@dataclass(frozen=True)
class TypoCandidate:
    entry: RouteEntry
    typo_type: int
    suspect: AsToken
    reference: AsToken
    position: int

    def __post_init__(self):
        if self.typo_type not in TYPO_TYPES:
            raise ValueError(f"unknown typo type {self.typo_type}")
        if self.suspect.text == self.reference.text:
            raise ValueError("suspect and reference must differ")
        tokens = self.entry.path.tokens
        if not 0 <= self.position < len(tokens) or tokens[self.position].text != self.suspect.text:
            raise ValueError(f"position {self.position} does not hold {self.suspect}")

    @property
    def key(self) -> TypoKey:
        return TypoKey(self.typo_type, self.suspect.text, self.reference.text)

    @property
    def dedup_key(self):
        p = self.entry.prefix
        return (self.typo_type, self.suspect.text, self.reference.text, p.network, p.length)

    @property
    def run_length(self) -> int:
        tokens = self.entry.path.tokens
        n = 0
        while self.position + n < len(tokens) and tokens[self.position + n].text == self.suspect.text:
            n += 1
        return n

    def prepend_count_matches(self) -> bool | None:
        """For type 1, whether the count token equals the upstream's repetitions."""
        if self.typo_type != PREPEND_COUNT:
            return None
        runs = collapse_runs(self.entry.path)
        return len(runs) >= 2 and runs[-2][1] == self.suspect.value

    def row(self) -> list:
        e = self.entry
        return [self.typo_type, str(e.prefix), self.suspect.text, self.reference.text,
                self.position, e.collector, e.peer_asn.text, str(e.path)]


def _check_scannable(entry: RouteEntry):
    if entry.path.contains_as_set:
        raise UnsupportedPathError(f"AS_SET path for {entry.prefix} cannot be scanned")


def scan_path_pairs(entry: RouteEntry, cfg: ScanConfig | None = None) -> list[TypoCandidate]:
    """Types 2-4 from adjacent pairs of the collapsed path.

    The suspect is the single-copy token next to a longer run of the
    similar token, otherwise the right-hand (origin side) one. For
    missing-space pairs it is always the concatenated token.
    """
    _check_scannable(entry)
    runs = collapse_runs(entry.path)
    starts = run_starts(runs)
    out: list[TypoCandidate] = []
    seen = set()
    for i in range(len(runs) - 1):
        (left, lc), (right, rc) = runs[i], runs[i + 1]
        typo_type = pair_type(left.text, right.text)
        if typo_type is None:
            continue
        if typo_type == MISSING_SPACE:
            pick_left = len(left.text) > len(right.text)
        else:
            pick_left = lc == 1 and rc > 1
        if pick_left:
            suspect, reference, pos = left, right, starts[i]
        else:
            suspect, reference, pos = right, left, starts[i + 1]
        k = (suspect.text, reference.text)
        if k in seen:
            continue
        seen.add(k)
        out.append(TypoCandidate(entry, typo_type, suspect, reference, pos))
    return out


def scan_type1(
    entry: RouteEntry, whitelist: UpstreamWhitelist, cfg: ScanConfig | None = None
) -> TypoCandidate | None:
    """Small-ASN origin reached through an upstream missing from the whitelist."""
    cfg = cfg or ScanConfig()
    if entry.path.contains_as_set:
        return None
    runs = collapse_runs(entry.path)
    if len(runs) < 2:
        return None
    origin = runs[-1][0]
    upstream, upstream_count = runs[-2]
    if not cfg.is_small(origin.value) or upstream_count < cfg.min_run_for_type1:
        return None
    if whitelist.allows(origin.value, upstream.value):
        return None
    pos = len(entry.path.tokens) - runs[-1][1]
    return TypoCandidate(entry, PREPEND_COUNT, origin, upstream, pos)


def scan_type4_overflow(entry: RouteEntry, cfg: ScanConfig | None = None) -> list[TypoCandidate]:
    """Tokens whose value exceeds the largest plausible assigned ASN."""
    cfg = cfg or ScanConfig()
    if entry.path.contains_as_set:
        return []
    runs = collapse_runs(entry.path)
    starts = run_starts(runs)
    out = []
    for i, (tok, _) in enumerate(runs):
        if tok.value <= cfg.max_assigned_asn:
            continue
        neighbours = [runs[j][0] for j in (i - 1, i + 1) if 0 <= j < len(runs)]
        if not neighbours:
            log.debug("overflow token %s in %s has no neighbour", tok, entry.prefix)
            continue
        explained = [n for n in neighbours if missing_space_typo(tok.text, n.text)]
        reference = explained[0] if explained else neighbours[0]
        out.append(TypoCandidate(entry, MISSING_SPACE, tok, reference, starts[i]))
    return out


def scan_entry(
    entry: RouteEntry, whitelist: UpstreamWhitelist, cfg: ScanConfig | None = None
) -> list[TypoCandidate]:
    """All candidates for one route, deduplicated per (type, suspect, reference)."""
    cfg = cfg or ScanConfig()
    _check_scannable(entry)
    found = []
    t1 = scan_type1(entry, whitelist, cfg)
    if t1 is not None:
        found.append(t1)
    found.extend(scan_path_pairs(entry, cfg))
    found.extend(scan_type4_overflow(entry, cfg))
    seen = set()
    out = []
    for c in found:
        if c.key not in seen:
            seen.add(c.key)
            out.append(c)
    return out


@dataclass
class CandidateSet:
    candidates: list[TypoCandidate] = field(default_factory=list)
    scanned: int = 0
    skipped_as_set: int = 0
    errors: int = 0
    default_routes: int = 0

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def counts(self) -> dict[int, int]:
        c = Counter(cand.typo_type for cand in self.candidates)
        return {t: c.get(t, 0) for t in TYPO_TYPES}

    def summary(self) -> str:
        parts = [f"type{t}:{n}" for t, n in self.counts().items()]
        return " ".join(parts)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CANDIDATE_FIELDS)
        for c in self.candidates:
            w.writerow(c.row())


def _scan_chunk(args):
    offset, entries, whitelist, cfg = args
    found = []
    stats = Counter()
    for i, entry in enumerate(entries, offset):
        if entry.prefix.is_default:
            stats["default_routes"] += 1
        if entry.path.contains_as_set:
            stats["skipped_as_set"] += 1
            continue
        try:
            cands = scan_entry(entry, whitelist, cfg)
        except (UnsupportedPathError, ValueError) as exc:
            log.debug("entry %d not scanned: %s", i, exc)
            stats["errors"] += 1
            continue
        stats["scanned"] += 1
        found.extend((c.dedup_key, i, c) for c in cands)
    return found, stats


def _chunks(entries: Sequence[RouteEntry], n: int):
    size = max(1, -(-len(entries) // n))
    for start in range(0, len(entries), size):
        yield start, entries[start:start + size]


def scan_snapshot(
    snapshot: Snapshot | Sequence[RouteEntry],
    whitelist: UpstreamWhitelist,
    cfg: ScanConfig | None = None,
    workers: int = 1,
) -> CandidateSet:
    """Scan every AS_SET-free entry.

    Candidates are deduplicated per (type, suspect, reference, prefix); the
    earliest entry in input order represents each key, and the result is
    sorted by key, so it does not depend on ``workers``.
    """
    cfg = cfg or ScanConfig()
    entries = tuple(snapshot)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    jobs = [(off, chunk, whitelist, cfg) for off, chunk in _chunks(entries, workers)]
    if workers == 1 or len(jobs) <= 1:
        results = map(_scan_chunk, jobs)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_chunk, jobs))
    best: dict = {}
    stats = Counter()
    for found, chunk_stats in results:
        stats.update(chunk_stats)
        for key, idx, cand in found:
            if key not in best or idx < best[key][0]:
                best[key] = (idx, cand)
    ordered = [best[k][1] for k in sorted(best)]
    return CandidateSet(
        ordered,
        scanned=stats["scanned"],
        skipped_as_set=stats["skipped_as_set"],
        errors=stats["errors"],
        default_routes=stats["default_routes"],
    )


def build_upstream_whitelist(
    snapshots: Iterable[Snapshot], ownership: OwnershipDb, cfg: ScanConfig | None = None
) -> UpstreamWhitelist:
    """Collect upstreams that legitimately carry prefixes owned by small ASNs.

    A route counts only when its origin is in the small-ASN range and the
    ownership database lists that origin for the announced prefix.
    """
    cfg = cfg or ScanConfig()
    snapshots = list(snapshots)
    if not snapshots:
        raise ValueError("at least one snapshot is required to build a whitelist")
    ups: dict[int, set[int]] = {}
    for snap in snapshots:
        for entry in snap:
            if entry.path.contains_as_set:
                continue
            runs = collapse_runs(entry.path)
            if len(runs) < 2:
                continue
            origin = runs[-1][0].value
            if not cfg.is_small(origin):
                continue
            owners = ownership.lookup(entry.prefix)
            if owners is None or origin not in owners:
                continue
            ups.setdefault(origin, set()).add(runs[-2][0].value)
    if not ups:
        log.warning("no qualifying small-ASN routes; whitelist is empty")
    return UpstreamWhitelist({k: frozenset(v) for k, v in ups.items()}, cfg.small_asn_range)
