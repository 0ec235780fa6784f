import os

import pytest

from bgptypo import (
    ClassifyContext,
    RouteEntry,
    load_adjacency,
    load_ownership,
    load_registry,
    load_whitelist,
    open_snapshot,
    parse_path,
)
from bgptypo.paths import Prefix, token

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_file(name):
    return os.path.join(DATA, name)


def route(path, prefix="10.0.0.0/24", collector="rv2", ts=1_500_000_000, peer=None):
    p = parse_path(path)
    return RouteEntry(ts, collector, peer or p.tokens[0], Prefix.parse(prefix), p)


@pytest.fixture(scope="session")
def quoted_snapshot():
    return open_snapshot(data_file("quoted_routes.txt"), label="2019-12")


@pytest.fixture(scope="session")
def ownership():
    return load_ownership(data_file("ownership.tsv"))


@pytest.fixture(scope="session")
def registry():
    return load_registry(data_file("registry.tsv"))


@pytest.fixture(scope="session")
def adjacency():
    return load_adjacency(data_file("adjacency.tsv"))


@pytest.fixture(scope="session")
def whitelist():
    return load_whitelist(data_file("whitelist.tsv"))


@pytest.fixture(scope="session")
def quoted_ctx(quoted_snapshot, ownership, registry, adjacency):
    return ClassifyContext(ownership, registry, adjacency, quoted_snapshot.active_origins())


@pytest.fixture(scope="session")
def synthetic_corpus():
    from bgptypo.synth import generate_corpus

    return generate_corpus(seed=7)


__all__ = ["route", "data_file", "token"]
