"""Detect, classify and clean AS-path prepending typos in BGP RIB snapshots."""
from .classify import (
    ClassifyContext,
    Outcome,
    Rule,
    Verdict,
    classify,
    classify_all,
    repair,
    repair_entry,
    rule_geo,
    rule_inactive,
    rule_loop,
    rule_origin,
)
from .estimators import TypoClassifier, TypoCleaner, TypoScanner
from .exceptions import (
    BgpTypoError,
    ContractViolation,
    CorruptInputError,
    DatabaseFormatError,
    DuplicateKeyError,
    PathParseError,
    UnsupportedPathError,
)
from .ingest import (
    AsnRegistry,
    CountryAdjacency,
    OwnershipDb,
    UpstreamWhitelist,
    load_adjacency,
    load_ownership,
    load_registry,
    load_snapshot,
    load_whitelist,
    longest_prefix_owner,
    open_snapshot,
)
from .longitudinal import (
    ClassifiedSnapshot,
    country_breakdown,
    geometric_duration,
    monthly_metrics,
    persistence_matrix,
    prevalence_stats,
    retention_series,
    simulate_lifetimes,
)
from .paths import (
    AsPath,
    AsToken,
    Prefix,
    RouteEntry,
    Snapshot,
    address_count,
    collapse_runs,
    has_loop,
    parse_path,
)
from .scan import (
    CandidateSet,
    ScanConfig,
    TypoCandidate,
    TypoKey,
    build_upstream_whitelist,
    ins_del_typo,
    missing_space_typo,
    scan_entry,
    scan_path_pairs,
    scan_snapshot,
    scan_type1,
    scan_type4_overflow,
    swap_typo,
)

__all__ = [
    "ClassifyContext",
    "Outcome",
    "Rule",
    "Verdict",
    "classify",
    "classify_all",
    "repair",
    "repair_entry",
    "rule_geo",
    "rule_inactive",
    "rule_loop",
    "rule_origin",
    "TypoClassifier",
    "TypoCleaner",
    "TypoScanner",
    "BgpTypoError",
    "ContractViolation",
    "CorruptInputError",
    "DatabaseFormatError",
    "DuplicateKeyError",
    "PathParseError",
    "UnsupportedPathError",
    "AsnRegistry",
    "CountryAdjacency",
    "OwnershipDb",
    "UpstreamWhitelist",
    "load_adjacency",
    "load_ownership",
    "load_registry",
    "load_snapshot",
    "load_whitelist",
    "longest_prefix_owner",
    "open_snapshot",
    "ClassifiedSnapshot",
    "country_breakdown",
    "geometric_duration",
    "monthly_metrics",
    "persistence_matrix",
    "prevalence_stats",
    "retention_series",
    "simulate_lifetimes",
    "AsPath",
    "AsToken",
    "Prefix",
    "RouteEntry",
    "Snapshot",
    "address_count",
    "collapse_runs",
    "has_loop",
    "parse_path",
    "CandidateSet",
    "ScanConfig",
    "TypoCandidate",
    "TypoKey",
    "build_upstream_whitelist",
    "ins_del_typo",
    "missing_space_typo",
    "scan_entry",
    "scan_path_pairs",
    "scan_snapshot",
    "scan_type1",
    "scan_type4_overflow",
    "swap_typo",
]

__version__ = "0.1.0"
