"""Synthetic RIB corpora with planted typos, for evaluating detection.

The topology is a three-tier provider hierarchy. Routes are valley-free,
loop-free and always originated by the prefix owner, so any typo verdict on
an un-injected route is a false positive.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ingest import AsnRegistry, CountryAdjacency, OwnershipDb
from .paths import AsPath, Prefix, RouteEntry, Snapshot, month_start, token
from .scan import (
    INSERT_DELETE,
    MISSING_SPACE,
    PREPEND_COUNT,
    SWAP,
    ins_del_typo,
    missing_space_typo,
    pair_type,
    swap_typo,
)

COUNTRIES = ["US", "BR", "RU", "GB", "DE", "AU", "PL", "IN", "UA", "CA", "ID", "IT", "FR", "JP", "VN"]
NEIGHBOURS = [
    ("US", "CA"), ("UA", "PL"), ("UA", "RU"), ("PL", "DE"), ("DE", "FR"), ("FR", "IT"),
    ("GB", "FR"), ("RU", "JP"), ("ID", "AU"), ("VN", "ID"), ("IN", "VN"), ("BR", "US"),
]


@dataclass(frozen=True)
class InjectedTypo:
    index: int
    typo_type: int
    suspect: str
    reference: str
    prefix: Prefix


@dataclass
class SyntheticCorpus:
    snapshot: Snapshot
    ownership: OwnershipDb
    registry: AsnRegistry
    adjacency: CountryAdjacency
    injected: list[InjectedTypo]
    providers: dict[int, list[int]] = field(default_factory=dict)

    @property
    def injected_indices(self) -> set[int]:
        return {t.index for t in self.injected}

    def clean_entries(self) -> tuple[RouteEntry, ...]:
        bad = self.injected_indices
        return tuple(e for i, e in enumerate(self.snapshot.entries) if i not in bad)


def _related(a: str, b: str) -> bool:
    return pair_type(a, b) is not None


def _pick_asns(rng: random.Random, n: int) -> list[int]:
    chosen: list[str] = []
    while len(chosen) < n:
        cand = str(rng.randrange(1000, 400_000))
        if cand in chosen or any(_related(cand, c) for c in chosen):
            continue
        chosen.append(cand)
    return [int(c) for c in chosen]


def _similar_variant(rng: random.Random, asn: str, taken: set[str]) -> str | None:
    """A swap or insert/delete look-alike of ``asn`` not already in use."""
    options = []
    for i in range(len(asn) - 1):
        if asn[i] != asn[i + 1]:
            options.append(asn[:i] + asn[i + 1] + asn[i] + asn[i + 2:])
    for i in range(len(asn)):
        options.append(asn[:i] + asn[i + 1:])
        for d in "0123456789":
            options.append(asn[:i] + d + asn[i:])
    rng.shuffle(options)
    for v in options:
        if v != asn and v[0] != "0" and v not in taken and len(v) >= 4 and int(v) <= 400_000:
            if swap_typo(asn, v) or ins_del_typo(asn, v):
                return v
    return None


def generate_corpus(
    n_routes: int = 100_000,
    n_as: int = 500,
    n_typos: int = 500,
    n_collectors: int = 10,
    peers_per_collector: int = 2,
    n_siblings: int = 20,
    seed: int = 0,
    label: str = "2020-05",
) -> SyntheticCorpus:
    rng = random.Random(seed)
    n_small = 12
    n_tier1 = 10
    n_tier2 = 90
    regular = _pick_asns(rng, n_as - n_small - n_siblings)
    tier1 = regular[:n_tier1]
    tier2 = regular[n_tier1:n_tier1 + n_tier2]
    tier3 = regular[n_tier1 + n_tier2:]

    providers: dict[int, list[int]] = {}
    country: dict[int, str] = {}
    for a in tier1:
        country[a] = rng.choice(COUNTRIES[:5])
    for a in tier2:
        providers[a] = rng.sample(tier1, rng.randint(1, 2))
        country[a] = rng.choice(COUNTRIES)
    upper = tier1 + tier2
    for a in tier3:
        providers[a] = rng.sample(upper, rng.randint(1, 3))
        p = providers[a][0]
        country[a] = country[p] if rng.random() < 0.7 else rng.choice(COUNTRIES)

    # legitimate look-alike neighbours: a customer whose ASN resembles its provider's
    taken = {str(a) for a in regular}
    siblings = []
    for prov in rng.sample(tier2 + tier3[:100], n_siblings):
        v = _similar_variant(rng, str(prov), taken)
        if v is None:
            continue
        taken.add(v)
        sib = int(v)
        providers[sib] = [prov]
        country[sib] = country[prov] if rng.random() < 0.9 else rng.choice(COUNTRIES)
        siblings.append(sib)
    # half the look-alikes also sell transit, placing them mid-path
    lower = tier3[100:]
    for sib in siblings:
        if rng.random() < 0.5:
            for cust in rng.sample(lower, 2):
                providers[cust].append(sib)
    small = list(range(1, n_small + 1))
    for a in small:
        providers[a] = rng.sample(tier2, rng.randint(1, 2))
        country[a] = "US"
    all_as = tier1 + tier2 + tier3 + siblings + small

    # one /16 allocation per AS; announcements are /20s and /24s inside it
    alloc = {}
    for i, a in enumerate(all_as):
        alloc[a] = Prefix((11 + i // 256) << 24 | (i % 256) << 16, 16)
    ownership = OwnershipDb({p: {a} for a, p in alloc.items()})

    collectors = [f"rc{i:02d}" for i in range(n_collectors)]
    peer_pool = rng.sample(tier2 + tier3, n_collectors * peers_per_collector)
    peers = [(collectors[i // peers_per_collector], p) for i, p in enumerate(peer_pool)]
    n_prefixes = -(-n_routes // len(peers))

    def uphill(asn):
        chain = [asn]
        while asn in providers:
            asn = rng.choice(providers[asn])
            chain.append(asn)
        return chain

    peer_chain = {p: uphill(p) for _, p in peers}
    prefixes = []
    for k in range(n_prefixes):
        origin = all_as[k % len(all_as)]
        block = alloc[origin]
        sub = k // len(all_as)
        if sub < 16:
            pfx = Prefix(block.network | sub << 12, 20)
        else:
            pfx = Prefix(block.network | (sub % 256) << 8, 24)
        chain = uphill(origin)
        prepend = rng.randint(2, 6) if rng.random() < 0.4 else 1
        transit_prepend = rng.randint(2, 3) if rng.random() < 0.1 and len(chain) > 2 else 1
        prefixes.append((pfx, chain, prepend, transit_prepend))

    ts = month_start(label)
    entries = []
    for pfx, chain, prepend, transit_prepend in prefixes:
        for collector, peer in peers:
            if len(entries) >= n_routes:
                break
            up = peer_chain[peer]
            pos = {a: j for j, a in enumerate(chain)}
            cut = next((i for i, a in enumerate(up) if a in pos), None)
            if cut is None:
                seq = up + chain[::-1]
            else:
                seq = up[:cut] + chain[pos[up[cut]]::-1]
            path = seq[:-1] + [seq[-1]] * prepend
            if transit_prepend > 1 and len(seq) >= 3 and seq[-2] != seq[0]:
                path = seq[:-2] + [seq[-2]] * transit_prepend + [seq[-1]] * prepend
            entries.append(RouteEntry(ts, collector, token(peer), pfx,
                                      AsPath(tuple(token(a) for a in path))))

    registry = AsnRegistry({a: country[a] for a in all_as})
    adjacency = CountryAdjacency.from_pairs(NEIGHBOURS)
    entries, injected = _inject(rng, entries, n_typos, set(taken), providers)
    snap = Snapshot(label, tuple(entries))
    return SyntheticCorpus(snap, ownership, registry, adjacency, injected, providers)


def _runs(path):
    out = []
    for i, t in enumerate(path):
        if out and out[-1][0] == t:
            out[-1][2] += 1
        else:
            out.append([t, i, 1])
    return out


def _inject(rng, entries, n_typos, taken, providers):
    by_prefix: dict[Prefix, list[int]] = {}
    for i, e in enumerate(entries):
        by_prefix.setdefault(e.prefix, []).append(i)
    prefix_order = sorted(by_prefix)
    rng.shuffle(prefix_order)
    kinds = [PREPEND_COUNT, SWAP, INSERT_DELETE, MISSING_SPACE]
    injected = []
    entries = list(entries)
    small_upstreams = {a: set(providers.get(a, ())) for a in range(1, 13)}
    for pfx in prefix_order:
        if len(injected) >= n_typos:
            break
        kind = kinds[len(injected) % len(kinds)]
        idx = rng.choice(by_prefix[pfx])
        e = entries[idx]
        texts = [t.text for t in e.path.tokens]
        if len(set(texts)) < 2:
            continue
        runs = _runs(texts)
        origin = texts[-1]
        if kind == PREPEND_COUNT:
            if int(origin) <= 12:
                continue
            count = runs[-1][2] if runs[-1][2] > 1 else rng.randint(2, 12)
            if int(origin) in small_upstreams.get(count, ()):
                continue
            if rng.random() < 0.5:
                new = texts[:runs[-1][1] + 1] + [str(count)]
            else:
                new = texts + [str(count)]
            injected.append(InjectedTypo(idx, kind, str(count), origin, pfx))
        else:
            long_runs = [r for r in runs if r[2] >= 2 and int(r[0]) > 12]
            if not long_runs:
                continue
            asn, start, count = rng.choice(long_runs)
            if kind == MISSING_SPACE:
                j = start + rng.randrange(count - 1)
                bad = asn + asn
                new = texts[:j] + [bad] + texts[j + 2:]
            else:
                bad = _typo_variant(rng, asn, kind, taken)
                if bad is None:
                    continue
                j = start + rng.randrange(count)
                new = texts[:j] + [bad] + texts[j + 1:]
            taken.add(bad)
            injected.append(InjectedTypo(idx, kind, bad, asn, pfx))
        entries[idx] = e.with_path(AsPath(tuple(token(t) for t in new)))
    return entries, injected


def _typo_variant(rng, asn: str, kind: int, taken: set[str]) -> str | None:
    opts = []
    if kind == SWAP:
        for i in range(len(asn) - 1):
            if asn[i] != asn[i + 1]:
                opts.append(asn[:i] + asn[i + 1] + asn[i] + asn[i + 2:])
    else:
        for i in range(len(asn)):
            opts.append(asn[:i] + asn[i + 1:])
            for d in "0123456789":
                opts.append(asn[:i] + d + asn[i:])
    rng.shuffle(opts)
    for v in opts:
        if v[0] == "0" or v in taken or int(v) <= 12:
            continue
        if kind == SWAP and swap_typo(asn, v):
            return v
        if kind == INSERT_DELETE and ins_del_typo(asn, v) and not missing_space_typo(asn, v):
            return v
    return None
