"""Rule ladder deciding whether a candidate is a typo, and path repair."""
from __future__ import annotations

import csv
import enum
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exceptions import ContractViolation
from .ingest import AsnRegistry, CountryAdjacency, OwnershipDb
from .paths import AsPath, RouteEntry, collapse_runs, looped_values, run_starts
from .scan import MISSING_SPACE, PREPEND_COUNT, TypoCandidate

VERDICT_FIELDS = ["typo_type", "prefix", "suspect", "reference", "outcome", "rule", "detail"]


class Outcome(str, enum.Enum):
    TYPO = "typo"
    NOT_TYPO = "not_typo"
    UNKNOWN = "unknown"


class Rule(str, enum.Enum):
    LOOP = "loop"
    ORIGIN = "origin"
    GEO = "geo"
    INACTIVE = "inactive"
    NONE = "none"


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    rule: Rule = Rule.NONE
    detail: str = ""

    def __post_init__(self):
        if (self.outcome is Outcome.TYPO) != (self.rule is not Rule.NONE):
            raise ValueError("a typo verdict needs a rule, and only typo verdicts have one")
        if self.outcome is Outcome.UNKNOWN and not self.detail:
            raise ValueError("unknown verdicts must name the missing data")

    @property
    def is_typo(self) -> bool:
        return self.outcome is Outcome.TYPO


NOT_TYPO = Verdict(Outcome.NOT_TYPO, Rule.NONE, "no rule fired")


@dataclass(frozen=True)
class ClassifyContext:
    ownership: OwnershipDb = field(default_factory=OwnershipDb)
    registry: AsnRegistry = field(default_factory=AsnRegistry)
    adjacency: CountryAdjacency = field(default_factory=CountryAdjacency)
    active_origins: frozenset[int] = frozenset()
    enable_geo: bool = True
    enable_inactive: bool = True


def _without_suspect(c: TypoCandidate) -> AsPath:
    tokens = c.entry.path.tokens
    end = c.position + c.run_length
    return AsPath(tokens[:c.position] + tokens[end:])


def rule_loop(c: TypoCandidate, ctx: ClassifyContext | None = None) -> Verdict | None:
    """Typo when the suspect/reference pair forms a loop that the suspect causes."""
    before = looped_values(c.entry.path)
    if not before:
        return None
    pair = {c.suspect.value, c.reference.value}
    if not pair & before:
        return None
    after = looped_values(_without_suspect(c))
    if pair & after:
        return None
    return Verdict(Outcome.TYPO, Rule.LOOP, f"AS{c.suspect} splits a run of AS{c.reference}")


def _touches_origin(c: TypoCandidate) -> bool:
    runs = collapse_runs(c.entry.path)
    last = runs[-1][0].text
    return c.suspect.text == last or c.reference.text == last


def rule_origin(c: TypoCandidate, ctx: ClassifyContext) -> Verdict | None:
    """Compare the origin with the prefix owner when the pair sits at the origin."""
    if not _touches_origin(c):
        return None
    owners = ctx.ownership.lookup(c.entry.prefix)
    origin = c.entry.path.origin()
    if owners is None:
        return Verdict(Outcome.UNKNOWN, Rule.NONE, f"no ownership data for {c.entry.prefix}")
    if origin.value in owners:
        return None
    owned_by = ",".join(f"AS{a}" for a in sorted(owners))
    return Verdict(Outcome.TYPO, Rule.ORIGIN, f"origin AS{origin} but {c.entry.prefix} owned by {owned_by}")


def _neighbours(c: TypoCandidate):
    runs = collapse_runs(c.entry.path)
    starts = run_starts(runs)
    i = starts.index(c.position)
    left = runs[i - 1][0] if i > 0 else None
    right = runs[i + 1][0] if i + 1 < len(runs) else None
    return left, right


def rule_geo(c: TypoCandidate, ctx: ClassifyContext) -> Verdict | None:
    """Typo when left and right neighbours share a country the suspect does not border.

    Abstains whenever a country is unknown.
    """
    if not ctx.enable_geo:
        return None
    left, right = _neighbours(c)
    if left is None or right is None:
        return None
    cl = ctx.registry.country(left.value)
    cs = ctx.registry.country(c.suspect.value)
    cr = ctx.registry.country(right.value)
    if cl is None or cs is None or cr is None:
        return None
    if cl == cr and cs != cl and not ctx.adjacency.adjacent(cl, cs):
        return Verdict(Outcome.TYPO, Rule.GEO, f"country cycle {cl}-{cs}-{cr}")
    return None


def rule_inactive(c: TypoCandidate, ctx: ClassifyContext) -> Verdict | None:
    if not ctx.enable_inactive:
        return None
    asn = c.suspect.value
    if asn in ctx.active_origins or asn in ctx.registry:
        return None
    return Verdict(Outcome.TYPO, Rule.INACTIVE, f"AS{c.suspect} unregistered and originates nothing")


def classify(c: TypoCandidate, ctx: ClassifyContext) -> Verdict:
    """Run loop, origin, geo and inactive rules in order; the first hit wins."""
    v = rule_loop(c, ctx)
    if v is not None:
        return v
    unknown = None
    v = rule_origin(c, ctx)
    if v is not None:
        if v.is_typo:
            return v
        unknown = v
    for rule in (rule_geo, rule_inactive):
        v = rule(c, ctx)
        if v is not None:
            return v
    return unknown or NOT_TYPO


def _classify_chunk(args):
    cands, ctx = args
    return [classify(c, ctx) for c in cands]


def classify_all(
    candidates: Sequence[TypoCandidate], ctx: ClassifyContext, workers: int = 1
) -> list[Verdict]:
    candidates = list(candidates)
    if workers <= 1 or len(candidates) < 2:
        return [classify(c, ctx) for c in candidates]
    size = -(-len(candidates) // workers)
    jobs = [(candidates[i:i + size], ctx) for i in range(0, len(candidates), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_classify_chunk, jobs))
    return [v for part in parts for v in part]


def attribution(candidates: Iterable[TypoCandidate], verdicts: Iterable[Verdict]) -> dict[int, Counter]:
    """Per typo type, how many candidates each rule decided."""
    out: dict[int, Counter] = {}
    for c, v in zip(candidates, verdicts):
        label = v.rule.value if v.is_typo else v.outcome.value
        out.setdefault(c.typo_type, Counter())[label] += 1
    return out


def write_verdicts_csv(fh, candidates, verdicts) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(VERDICT_FIELDS)
    for c, v in zip(candidates, verdicts):
        w.writerow([c.typo_type, str(c.entry.prefix), c.suspect.text, c.reference.text,
                    v.outcome.value, v.rule.value, v.detail])


def repair(entry: RouteEntry, c: TypoCandidate, verdict: Verdict) -> RouteEntry:
    """Return ``entry`` with the typo at ``c.position`` corrected.

    Prepend counts are stripped, swapped or mistyped copies become the
    reference ASN, and concatenated tokens are split into two copies.
    """
    if not verdict.is_typo:
        raise ContractViolation(f"refusing to repair a {verdict.outcome.value} verdict")
    tokens = entry.path.tokens
    pos = c.position
    if not 0 <= pos < len(tokens) or tokens[pos].text != c.suspect.text:
        raise ContractViolation(f"AS{c.suspect} is not at position {pos} of {entry.path}")
    end = pos
    while end < len(tokens) and tokens[end].text == c.suspect.text:
        end += 1
    run = end - pos
    if c.typo_type == PREPEND_COUNT:
        fixed = tokens[:pos] + tokens[end:]
    elif c.typo_type == MISSING_SPACE:
        fixed = tokens[:pos] + _split_concatenated(c, tokens, pos, end) * run + tokens[end:]
    else:
        fixed = tokens[:pos] + (c.reference,) * run + tokens[end:]
    if not fixed:
        raise ContractViolation(f"repair would empty the path of {entry.prefix}")
    return entry.with_path(AsPath(fixed))


def _split_concatenated(c: TypoCandidate, tokens, pos: int, end: int) -> tuple:
    s, r = c.suspect.text, c.reference.text
    if s == r + r:
        return (c.reference, c.reference)
    left = tokens[pos - 1] if pos > 0 else None
    right = tokens[end] if end < len(tokens) else None
    if left is not None and right is not None and s == left.text + right.text:
        return (left, right)
    # not explained by its neighbours: fall back to the reference ASN
    return (c.reference,)


def repair_entry(entry: RouteEntry, fixes: Sequence[tuple[TypoCandidate, Verdict]]) -> RouteEntry:
    """Apply several typo fixes to one entry, right to left so positions stay valid."""
    current = entry
    for c, v in sorted(fixes, key=lambda cv: cv[0].position, reverse=True):
        tokens = current.path.tokens
        if c.position >= len(tokens) or tokens[c.position].text != c.suspect.text:
            continue
        shifted = TypoCandidate(current, c.typo_type, c.suspect, c.reference, c.position)
        current = repair(current, shifted, v)
    return current
