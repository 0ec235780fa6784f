"""scikit-learn style wrappers around scanning, classification and cleaning.

The estimators follow the usual contract: hyper-parameters go to
``__init__`` untouched, learned state ends in an underscore, and ``fit``
returns ``self``. "Fitting" here means learning snapshot-derived state:
the small-ASN upstream whitelist and the set of active origins.
"""
from __future__ import annotations

import logging
from collections import defaultdict

from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.utils.validation import check_is_fitted

from .classify import ClassifyContext, Verdict, classify_all, repair_entry
from .ingest import AsnRegistry, CountryAdjacency, OwnershipDb, UpstreamWhitelist
from .paths import RouteEntry
from .scan import CandidateSet, ScanConfig, build_upstream_whitelist, scan_entry, scan_snapshot
from .validation import check_candidates, check_entries, check_snapshots

log = logging.getLogger(__name__)


class TypoScanner(TransformerMixin, BaseEstimator):
    """Extract typo candidates from route entries.

    ``fit`` settles the upstream whitelist: the one passed in, or one built
    from the training snapshots and ``ownership``.
    """

    def __init__(self, small_asn_range=(1, 12), max_assigned_asn=500_000,
                 min_run_for_type1=1, whitelist=None, ownership=None, workers=1):
        self.small_asn_range = small_asn_range
        self.max_assigned_asn = max_assigned_asn
        self.min_run_for_type1 = min_run_for_type1
        self.whitelist = whitelist
        self.ownership = ownership
        self.workers = workers

    def _config(self) -> ScanConfig:
        return ScanConfig(tuple(self.small_asn_range), self.max_assigned_asn, self.min_run_for_type1)

    def fit(self, X, y=None):
        self.config_ = self._config()
        if self.whitelist is not None:
            self.whitelist_ = self.whitelist
        elif self.ownership is not None:
            self.whitelist_ = build_upstream_whitelist(check_snapshots(X), self.ownership, self.config_)
        else:
            log.warning("no whitelist or ownership given; every small-ASN origin is suspect")
            self.whitelist_ = UpstreamWhitelist({}, self.config_.small_asn_range)
        return self

    def transform(self, X) -> CandidateSet:
        check_is_fitted(self, "whitelist_")
        return scan_snapshot(check_entries(X), self.whitelist_, self.config_, workers=self.workers)

    def scan_entry(self, entry: RouteEntry):
        check_is_fitted(self, "whitelist_")
        return scan_entry(entry, self.whitelist_, self.config_)


class TypoClassifier(BaseEstimator):
    """Label candidates typo / not-typo / unknown.

    ``fit`` records the ASNs originating prefixes in the snapshot, which the
    inactive-ASN rule needs; fit on the same snapshot you classify.
    """

    def __init__(self, ownership=None, registry=None, adjacency=None,
                 enable_geo=True, enable_inactive=True, workers=1):
        self.ownership = ownership
        self.registry = registry
        self.adjacency = adjacency
        self.enable_geo = enable_geo
        self.enable_inactive = enable_inactive
        self.workers = workers

    def fit(self, X, y=None):
        origins = set()
        for entry in check_entries(X):
            if entry.path.tokens:
                origins.add(entry.path.tokens[-1].value)
        self.active_origins_ = frozenset(origins)
        self.context_ = ClassifyContext(
            ownership=self.ownership if self.ownership is not None else OwnershipDb(),
            registry=self.registry if self.registry is not None else AsnRegistry(),
            adjacency=self.adjacency if self.adjacency is not None else CountryAdjacency(),
            active_origins=self.active_origins_,
            enable_geo=self.enable_geo,
            enable_inactive=self.enable_inactive,
        )
        return self

    def predict(self, candidates) -> list[Verdict]:
        check_is_fitted(self, "context_")
        return classify_all(check_candidates(candidates), self.context_, workers=self.workers)

    def score(self, candidates, y) -> float:
        """Recall of typo verdicts against boolean ground truth ``y``."""
        verdicts = self.predict(candidates)
        positives = [v.is_typo for v, truth in zip(verdicts, y) if truth]
        return sum(positives) / len(positives) if positives else 1.0


class TypoCleaner(TransformerMixin, BaseEstimator):
    """Scan, classify and repair each route; untouched routes pass through."""

    def __init__(self, scanner=None, classifier=None):
        self.scanner = scanner
        self.classifier = classifier

    def fit(self, X, y=None):
        snapshots = check_snapshots(X)
        self.scanner_ = clone(self.scanner) if self.scanner is not None else TypoScanner()
        self.scanner_.fit(snapshots)
        self.classifier_ = clone(self.classifier) if self.classifier is not None else TypoClassifier()
        self.classifier_.fit([e for s in snapshots for e in s])
        return self

    def transform(self, X) -> list[RouteEntry]:
        check_is_fitted(self, "classifier_")
        entries = check_entries(X)
        per_entry = defaultdict(list)
        flat = []
        for i, entry in enumerate(entries):
            if entry.path.contains_as_set:
                continue
            for c in self.scanner_.scan_entry(entry):
                per_entry[i].append(len(flat))
                flat.append(c)
        verdicts = self.classifier_.predict(flat)
        out = []
        changed = 0
        for i, entry in enumerate(entries):
            fixes = [(flat[j], verdicts[j]) for j in per_entry.get(i, ()) if verdicts[j].is_typo]
            new = repair_entry(entry, fixes) if fixes else entry
            changed += new is not entry and new.path != entry.path
            out.append(new)
        self.n_changed_ = changed
        return out
