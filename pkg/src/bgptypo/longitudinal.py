"""Multi-month analytics over classified snapshots."""
from __future__ import annotations

import csv
import logging
from decimal import Decimal
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classify import Verdict
from .ingest import AsnRegistry
from .paths import Prefix, RouteEntry, Snapshot, address_count, collapse_runs
from .scan import PREPEND_COUNT, TYPO_TYPES, TypoCandidate, TypoKey

log = logging.getLogger(__name__)


@dataclass
class ClassifiedSnapshot:
    """A snapshot together with its candidates and their verdicts."""

    snapshot: Snapshot
    candidates: list[TypoCandidate]
    verdicts: list[Verdict]

    def __post_init__(self):
        if len(self.candidates) != len(self.verdicts):
            raise ValueError("one verdict per candidate is required")

    @property
    def label(self) -> str:
        return self.snapshot.label

    def typos(self, typo_type: int | None = None) -> list[TypoCandidate]:
        return [c for c, v in zip(self.candidates, self.verdicts)
                if v.is_typo and (typo_type is None or c.typo_type == typo_type)]

    def keys(self, typo_type: int | None = None) -> set[TypoKey]:
        return {c.key for c in self.typos(typo_type)}


@dataclass(frozen=True)
class TypeMetrics:
    prefixes: int = 0
    keys: int = 0
    addresses: int = 0


@dataclass(frozen=True)
class MonthlyMetrics:
    month: str
    per_type: Mapping[int, TypeMetrics]


def monthly_metrics(month: ClassifiedSnapshot, union: bool = True) -> MonthlyMetrics:
    """Affected prefixes, typo keys and addresses per typo type.

    For type 1 the key count is the number of distinct ASNs left of the
    count digit rather than pairs.
    """
    per_type = {}
    for t in TYPO_TYPES:
        typos = month.typos(t)
        prefixes = {c.entry.prefix for c in typos}
        if t == PREPEND_COUNT:
            n_keys = len({c.reference.text for c in typos})
        else:
            n_keys = len({c.key for c in typos})
        per_type[t] = TypeMetrics(len(prefixes), n_keys, address_count(prefixes, union=union))
    return MonthlyMetrics(month.label, per_type)


def _check_order(months: Sequence[ClassifiedSnapshot]):
    labels = [m.label for m in months]
    if any(a >= b for a, b in zip(labels, labels[1:])):
        raise ValueError(f"months must be strictly chronological, got {labels}")


@dataclass(frozen=True)
class PersistenceMatrix:
    baseline: str
    months: tuple[str, ...]
    rows: tuple[TypoKey, ...]
    cells: tuple[tuple[bool, ...], ...]

    def row(self, key: TypoKey) -> tuple[bool, ...]:
        return self.cells[self.rows.index(key)]

    def survival_curve(self) -> list[float]:
        """Fraction of baseline keys seen in every month up to each column."""
        if not self.rows:
            return []
        out = []
        alive = [True] * len(self.rows)
        for j in range(len(self.months)):
            alive = [a and r[j] for a, r in zip(alive, self.cells)]
            out.append(sum(alive) / len(self.rows))
        return out


def persistence_matrix(
    baseline: Iterable[TypoKey] | None, months: Sequence[ClassifiedSnapshot]
) -> PersistenceMatrix:
    """Presence of each baseline typo key in every month.

    ``baseline`` defaults to the typo keys of the first month; keys that are
    not present in that month are rejected.
    """
    if not months:
        raise ValueError("at least one month is required")
    _check_order(months)
    month_keys = [m.keys() for m in months]
    keys = month_keys[0] if baseline is None else set(baseline)
    missing = keys - month_keys[0]
    if missing:
        raise ValueError(f"{len(missing)} baseline keys absent from {months[0].label}")
    rows = tuple(sorted(keys))
    cells = tuple(tuple(k in mk for mk in month_keys) for k in rows)
    return PersistenceMatrix(months[0].label, tuple(m.label for m in months), rows, cells)


def retention_series(months: Sequence[ClassifiedSnapshot]) -> list[tuple[str, dict[int, float | None]]]:
    """Share of month x typo keys also present in month x+1, per type.

    Values are fractions; a type with no keys in month x maps to ``None``.
    """
    if len(months) < 2:
        raise ValueError("retention needs at least two months")
    _check_order(months)
    out = []
    for cur, nxt in zip(months, months[1:]):
        row: dict[int, float | None] = {}
        for t in TYPO_TYPES:
            a, b = cur.keys(t), nxt.keys(t)
            row[t] = len(a & b) / len(a) if a else None
        out.append((cur.label, row))
    return out


def mean_retention(series) -> dict[int, float | None]:
    means = {}
    for t in TYPO_TYPES:
        vals = [row[t] for _, row in series if row.get(t) is not None]
        means[t] = sum(vals) / len(vals) if vals else None
    return means


def geometric_duration(p: float) -> float:
    """Mean lifetime in months for a geometric survival model."""
    if not 0 <= p < 1:
        raise ValueError(f"survival probability must be in [0, 1), got {p}")
    # decimal arithmetic on the shortest repr keeps 0.8 -> 5.0 exact
    return float(1 / (1 - Decimal(repr(float(p)))))


def simulate_lifetimes(p: float, n: int = 10_000, seed: int | None = 0) -> np.ndarray:
    """Draw lifetimes where a typo survives each further month with probability ``p``."""
    if not 0 <= p < 1:
        raise ValueError(f"survival probability must be in [0, 1), got {p}")
    rng = np.random.default_rng(seed)
    return rng.geometric(1.0 - p, size=n)


def format_duration(p: float) -> str:
    if p >= 1:
        return "∞ (p=1)"
    return f"{geometric_duration(p):.3f}"


def entry_has_key(entry: RouteEntry, key: TypoKey) -> bool:
    """Whether the route's path exhibits the typo identified by ``key``."""
    if entry.path.contains_as_set or not entry.path.tokens:
        return False
    runs = [t.text for t, _ in collapse_runs(entry.path)]
    if key.typo_type == PREPEND_COUNT:
        return len(runs) >= 2 and runs[-1] == key.suspect and runs[-2] == key.reference
    for a, b in zip(runs, runs[1:]):
        if {a, b} == {key.suspect, key.reference}:
            return True
    return False


@dataclass(frozen=True)
class PrevalenceRecord:
    key: TypoKey
    seeing: int
    carrying: int

    @property
    def ratio(self) -> float:
        return self.seeing / self.carrying


@dataclass
class PrevalenceStats:
    records: list[PrevalenceRecord]
    total_collectors: int
    histogram: dict[int, Counter] = field(default_factory=dict)

    def cdf(self, typo_type: int) -> list[tuple[float, float]]:
        """(percent, portion of keys seen by at least that percent of carriers)."""
        ratios = sorted(r.ratio for r in self.records if r.key.typo_type == typo_type)
        if not ratios:
            return []
        n = len(ratios)
        points = sorted(set(ratios))
        return [(100 * x, sum(1 for r in ratios if r >= x) / n) for x in points]


def prevalence_stats(month: ClassifiedSnapshot) -> PrevalenceStats:
    """Collector visibility of every typo key in one month.

    ``seeing`` counts collectors with an entry showing the typo for one of
    the key's typo prefixes; ``carrying`` counts collectors with any entry
    for those prefixes.
    """
    by_prefix: dict[Prefix, list[RouteEntry]] = defaultdict(list)
    for e in month.snapshot:
        by_prefix[e.prefix].append(e)
    prefixes_for: dict[TypoKey, set[Prefix]] = defaultdict(set)
    for c in month.typos():
        prefixes_for[c.key].add(c.entry.prefix)
    records = []
    for key in sorted(prefixes_for):
        seeing, carrying = set(), set()
        for p in prefixes_for[key]:
            for e in by_prefix.get(p, ()):
                carrying.add(e.collector)
                if entry_has_key(e, key):
                    seeing.add(e.collector)
        if not carrying:
            log.error("typo %s has no carrying collector; snapshot is inconsistent", key)
            continue
        records.append(PrevalenceRecord(key, len(seeing), len(carrying)))
    hist: dict[int, Counter] = {}
    for r in records:
        hist.setdefault(r.key.typo_type, Counter())[r.seeing] += 1
    return PrevalenceStats(records, len(month.snapshot.collectors), hist)


@dataclass(frozen=True)
class CountryBreakdown:
    offenders: Mapping[str, int]
    baseline_pct: Mapping[str, float]


UNKNOWN_COUNTRY = "??"


def country_breakdown(
    candidates: Iterable[TypoCandidate], verdicts: Iterable[Verdict], registry: AsnRegistry
) -> CountryBreakdown:
    """Countries of ASNs that emitted confirmed prepend-count typos.

    The offender is the ASN left of the count digit. The registry-wide
    share of ASNs per country is returned alongside for comparison.
    """
    offenders = set()
    for c, v in zip(candidates, verdicts):
        if c.typo_type == PREPEND_COUNT and v.is_typo:
            offenders.add(c.reference.value)
    counts = Counter(registry.country(a) or UNKNOWN_COUNTRY for a in offenders)
    total = len(registry)
    reg_counts = Counter(registry.countries.values())
    baseline = {cc: 100 * n / total for cc, n in reg_counts.items()} if total else {}
    return CountryBreakdown(dict(sorted(counts.items())), dict(sorted(baseline.items())))


# CSV writers, tidy long format

def write_metrics_csv(fh, metrics: Sequence[MonthlyMetrics]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["month", "type", "prefixes", "keys", "addresses"])
    for m in metrics:
        for t, tm in sorted(m.per_type.items()):
            w.writerow([m.month, t, tm.prefixes, tm.keys, tm.addresses])


def write_retention_csv(fh, series) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["month", "type", "retention_pct"])
    for label, row in series:
        for t, val in sorted(row.items()):
            if val is not None:
                w.writerow([label, t, f"{100 * val:.4f}"])


def write_persistence_csv(fh, matrix: PersistenceMatrix) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["type", "suspect", "reference", "month", "present"])
    for key, cells in zip(matrix.rows, matrix.cells):
        for month, present in zip(matrix.months, cells):
            w.writerow([key.typo_type, key.suspect, key.reference, month, int(present)])


def write_prevalence_csv(fh, months: Iterable[tuple[str, PrevalenceStats]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["month", "type", "suspect", "reference", "collectors_seeing",
                "collectors_carrying", "ratio_pct", "total_collectors"])
    for month, stats in months:
        for r in stats.records:
            w.writerow([month, r.key.typo_type, r.key.suspect, r.key.reference, r.seeing,
                        r.carrying, f"{100 * r.ratio:.4f}", stats.total_collectors])


def write_countries_csv(fh, breakdown: CountryBreakdown) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["country", "offenders", "registry_pct"])
    for cc in sorted(set(breakdown.offenders) | set(breakdown.baseline_pct)):
        pct = breakdown.baseline_pct.get(cc)
        w.writerow([cc, breakdown.offenders.get(cc, 0), "" if pct is None else f"{pct:.2f}"])
