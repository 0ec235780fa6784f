"""Command line front end: ``bgptypo scan|classify|clean|trend|simulate-duration``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from contextlib import contextmanager

from sklearn.base import clone

from .classify import attribution, write_verdicts_csv
from .estimators import TypoClassifier, TypoCleaner, TypoScanner
from .exceptions import BgpTypoError
from .ingest import (
    AsnRegistry,
    CountryAdjacency,
    OwnershipDb,
    load_adjacency,
    load_ownership,
    load_registry,
    load_whitelist,
    open_snapshot,
)
from .longitudinal import (
    ClassifiedSnapshot,
    country_breakdown,
    format_duration,
    mean_retention,
    monthly_metrics,
    persistence_matrix,
    prevalence_stats,
    retention_series,
    simulate_lifetimes,
    write_countries_csv,
    write_metrics_csv,
    write_persistence_csv,
    write_prevalence_csv,
    write_retention_csv,
)
from .scan import TYPO_TYPES

log = logging.getLogger("bgptypo")

DATA_DIR_ENV = "BGPTYPO_DATA_DIR"
RULE_LABELS = ("loop", "origin", "geo", "inactive", "not_typo", "unknown")


@contextmanager
def atomic_open(path: str):
    """Write to a temp file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return lo, hi


def read_config_file(path: str) -> dict:
    """Parse ``key=value`` lines; keys use flag names without leading dashes."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "snapshot":
                out[key] = value.split()
            elif key in ("no_geo", "no_inactive"):
                out[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in ("max_asn", "workers", "seed", "n"):
                out[key] = int(value)
            elif key == "p":
                out[key] = float(value)
            elif key == "small_asn_range":
                out[key] = parse_range(value)
            else:
                out[key] = value
    return out


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags win")
    common.add_argument("--snapshot", nargs="+", action="extend", default=None, metavar="PATH")
    common.add_argument("--format", default=None, help="snapshot format (canonical, mrt)")
    common.add_argument("--ownership")
    common.add_argument("--registry")
    common.add_argument("--adjacency")
    common.add_argument("--whitelist")
    common.add_argument("--out-dir", default="out")
    common.add_argument("--max-asn", type=int, default=500_000)
    common.add_argument("--small-asn-range", type=parse_range, default=(1, 12))
    common.add_argument("--no-geo", action="store_true")
    common.add_argument("--no-inactive", action="store_true")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bgptypo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {
        "scan": sub.add_parser("scan", parents=[common], help="extract typo candidates"),
        "classify": sub.add_parser("classify", parents=[common], help="label candidates"),
        "clean": sub.add_parser("clean", parents=[common], help="write repaired snapshots"),
        "trend": sub.add_parser("trend", parents=[common], help="longitudinal CSV bundle"),
    }
    sim = sub.add_parser("simulate-duration", parents=[common], help="simulate typo lifetimes")
    sim.add_argument("--p", type=float, default=0.8, help="monthly survival probability")
    sim.add_argument("--n", type=int, default=10_000, help="number of lifetimes")
    subs["simulate-duration"] = sim
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = read_config_file(args.config)
        except OSError as exc:
            parser.error(f"cannot read config {args.config}: {exc.strerror}")
        except ValueError as exc:
            parser.error(str(exc))
        subs[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    args.parser = subs[args.command]
    return args


def _resolve(args, path: str | None) -> str | None:
    if path is None:
        return None
    root = os.environ.get(DATA_DIR_ENV)
    if root and not os.path.isabs(path) and not os.path.exists(path):
        path = os.path.join(root, path)
    if not os.path.exists(path):
        args.parser.error(f"no such file: {path}")
    return path


class Inputs:
    def __init__(self, args):
        self.args = args
        if not args.snapshot:
            args.parser.error("at least one --snapshot is required")
        if args.workers < 1:
            args.parser.error("--workers must be >= 1")
        paths = [_resolve(args, p) for p in args.snapshot]
        own = _resolve(args, args.ownership)
        reg = _resolve(args, args.registry)
        adj = _resolve(args, args.adjacency)
        wl = _resolve(args, args.whitelist)
        self.snapshots = [open_snapshot(p, format=args.format) for p in paths]
        self.snapshots.sort(key=lambda s: s.label)
        self.ownership = load_ownership(own) if own else OwnershipDb()
        self.registry = load_registry(reg) if reg else AsnRegistry()
        self.adjacency = load_adjacency(adj) if adj else CountryAdjacency()
        self.whitelist = load_whitelist(wl, args.small_asn_range) if wl else None
        self.has_ownership = own is not None

    def scanner(self) -> TypoScanner:
        a = self.args
        sc = TypoScanner(
            small_asn_range=a.small_asn_range,
            max_assigned_asn=a.max_asn,
            whitelist=self.whitelist,
            ownership=self.ownership if self.has_ownership else None,
            workers=a.workers,
        )
        return sc.fit(self.snapshots)

    def classifier(self) -> TypoClassifier:
        a = self.args
        return TypoClassifier(
            ownership=self.ownership,
            registry=self.registry,
            adjacency=self.adjacency,
            enable_geo=not a.no_geo,
            enable_inactive=not a.no_inactive,
            workers=a.workers,
        )

    def classified(self, scanner=None) -> list[ClassifiedSnapshot]:
        scanner = scanner or self.scanner()
        out = []
        for snap in self.snapshots:
            cands = scanner.transform(snap)
            clf = self.classifier().fit(snap)
            out.append(ClassifiedSnapshot(snap, list(cands), clf.predict(cands)))
        return out


def _month_dir(args, label: str) -> str:
    return os.path.join(args.out_dir, label)


def cmd_scan(args) -> int:
    inputs = Inputs(args)
    scanner = inputs.scanner()
    for snap in inputs.snapshots:
        cands = scanner.transform(snap)
        with atomic_open(os.path.join(_month_dir(args, snap.label), "candidates.csv")) as fh:
            cands.write_csv(fh)
        print(f"{snap.label}: {len(cands)} candidates")
        print(f"{cands.summary()} skipped_as_set:{cands.skipped_as_set} "
              f"default_routes:{cands.default_routes} malformed:{snap.skipped}")
    return 0


def cmd_classify(args) -> int:
    inputs = Inputs(args)
    for month in inputs.classified():
        path = os.path.join(_month_dir(args, month.label), "verdicts.csv")
        with atomic_open(path) as fh:
            write_verdicts_csv(fh, month.candidates, month.verdicts)
        print(f"{month.label}: {len(month.candidates)} candidates")
        attr = attribution(month.candidates, month.verdicts)
        for t in TYPO_TYPES:
            counts = attr.get(t, {})
            print(f"type{t} " + " ".join(f"{k}:{counts.get(k, 0)}" for k in RULE_LABELS))
    return 0


def cmd_clean(args) -> int:
    inputs = Inputs(args)
    scanner = inputs.scanner()
    for snap in inputs.snapshots:
        settled = clone(scanner).set_params(whitelist=scanner.whitelist_)
        cleaner = TypoCleaner(scanner=settled, classifier=inputs.classifier()).fit(snap)
        cleaned = cleaner.transform(snap)
        path = os.path.join(_month_dir(args, snap.label), "cleaned.txt")
        with atomic_open(path) as fh:
            for entry in cleaned:
                fh.write(entry.to_line() + "\n")
        print(f"{snap.label}: lines_changed:{cleaner.n_changed_} lines:{len(cleaned)}")
    return 0


def cmd_trend(args) -> int:
    inputs = Inputs(args)
    months = inputs.classified()
    out = args.out_dir
    with atomic_open(os.path.join(out, "metrics.csv")) as fh:
        write_metrics_csv(fh, [monthly_metrics(m) for m in months])
    with atomic_open(os.path.join(out, "persistence.csv")) as fh:
        write_persistence_csv(fh, persistence_matrix(None, months))
    with atomic_open(os.path.join(out, "prevalence.csv")) as fh:
        write_prevalence_csv(fh, [(m.label, prevalence_stats(m)) for m in months])
    all_c = [c for m in months for c in m.candidates]
    all_v = [v for m in months for v in m.verdicts]
    with atomic_open(os.path.join(out, "countries.csv")) as fh:
        write_countries_csv(fh, country_breakdown(all_c, all_v, inputs.registry))
    print(f"months:{len(months)}")
    if len(months) < 2:
        log.warning("retention needs at least two months; retention.csv skipped")
        return 0
    series = retention_series(months)
    with atomic_open(os.path.join(out, "retention.csv")) as fh:
        write_retention_csv(fh, series)
    means = mean_retention(series)
    defined = [v for v in means.values() if v is not None]
    for t in TYPO_TYPES:
        val = means[t]
        print(f"type{t} mean_retention:{'' if val is None else f'{val:.4f}'}")
    if defined:
        p = sum(defined) / len(defined)
        print(f"p:{p:.4f} duration_months:{format_duration(p)}")
    return 0


def cmd_simulate(args) -> int:
    if not 0 <= args.p < 1:
        args.parser.error("--p must be in [0, 1)")
    lifetimes = simulate_lifetimes(args.p, args.n, args.seed)
    print(f"n:{args.n} p:{args.p} seed:{args.seed} mean_lifetime:{lifetimes.mean():.4f} "
          f"expected:{format_duration(args.p)}")
    return 0


COMMANDS = {
    "scan": cmd_scan,
    "classify": cmd_classify,
    "clean": cmd_clean,
    "trend": cmd_trend,
    "simulate-duration": cmd_simulate,
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (BgpTypoError, ValueError, OSError) as exc:
        print(f"bgptypo: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
