import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bgptypo import (
    PathParseError,
    Prefix,
    UnsupportedPathError,
    address_count,
    collapse_runs,
    has_loop,
    parse_path,
)
from bgptypo.paths import AsToken, Snapshot, token

from conftest import route


def texts(runs):
    return [(t.text, n) for t, n in runs]


class TestParsePath:
    def test_quoted_type1_path(self):
        p = parse_path("18351 131758 3")
        assert [t.text for t in p.tokens] == ["18351", "131758", "3"]
        assert p.origin().text == "3"

    def test_origin_code_dropped(self):
        assert [t.text for t in parse_path("1 2 2 i").tokens] == ["1", "2", "2"]
        assert len(parse_path("1 2 ?")) == 2

    def test_as_set_flagged(self):
        p = parse_path("1 {2,3} 4")
        assert p.contains_as_set
        assert str(p) == "1 {2,3} 4"

    def test_as_set_with_spaces(self):
        p = parse_path("1 {2, 3} 4 i")
        assert p.contains_as_set
        assert str(p) == "1 {2,3} 4"

    @pytest.mark.parametrize("bad", ["", "   ", "i", "1 2a 3", "1 -2", "AS1 2"])
    def test_errors(self, bad):
        with pytest.raises(PathParseError):
            parse_path(bad)

    def test_overflow_token_allowed(self):
        t = parse_path("32026 3202632026").tokens[1]
        assert t.value == 3202632026
        assert not t.is_assignable(500_000)
        assert t.is_assignable(2**34)

    @given(st.lists(st.integers(0, 2**32 - 1), min_size=1, max_size=20))
    def test_round_trip(self, values):
        text = " ".join(map(str, values))
        assert str(parse_path(text)) == text


class TestAsToken:
    def test_value_must_match_text(self):
        with pytest.raises(ValueError):
            AsToken("12", 13)

    def test_interned(self):
        assert token("174") is token(174)


class TestCollapseRuns:
    def test_examples(self):
        assert texts(collapse_runs(parse_path("1 2 2 2 3"))) == [("1", 1), ("2", 3), ("3", 1)]
        assert texts(collapse_runs(parse_path("5 5 5 5"))) == [("5", 4)]
        assert texts(collapse_runs(parse_path("29278 29728 29278"))) == [
            ("29278", 1), ("29728", 1), ("29278", 1)]

    def test_as_set_rejected(self):
        with pytest.raises(UnsupportedPathError):
            collapse_runs(parse_path("1 {2,3} 4"))

    @given(st.lists(st.integers(1, 6), min_size=1, max_size=30))
    def test_expansion_reproduces_path(self, values):
        path = parse_path(" ".join(map(str, values)))
        runs = collapse_runs(path)
        assert sum(n for _, n in runs) == len(path)
        expanded = [t.text for t, n in runs for _ in range(n)]
        assert expanded == [t.text for t in path.tokens]
        assert all(n >= 1 for _, n in runs)


class TestHasLoop:
    def test_quoted_loop(self):
        assert has_loop(parse_path(
            "293 6453 7738 8167 25933 25933 25933 264092 264092 26402 264092"))

    def test_examples(self):
        assert not has_loop(parse_path("1 2 2 2 3"))
        assert has_loop(parse_path("1 2 1"))

    def test_as_set_rejected(self):
        with pytest.raises(UnsupportedPathError):
            has_loop(parse_path("1 {2} 1"))

    @given(
        st.lists(st.integers(1, 10**6), min_size=1, max_size=12, unique=True),
        st.data(),
    )
    def test_distinct_runs_never_loop(self, values, data):
        counts = data.draw(st.lists(st.integers(1, 5), min_size=len(values), max_size=len(values)))
        text = " ".join(str(v) for v, n in zip(values, counts) for _ in range(n))
        assert not has_loop(parse_path(text))


class TestPrefix:
    def test_parse_and_count(self):
        p = Prefix.parse("2.176.0.0/12")
        assert p.address_count() == 1_048_576
        assert str(p) == "2.176.0.0/12"

    def test_host_bits_rejected(self):
        with pytest.raises(ValueError):
            Prefix.parse("10.0.0.1/24")

    def test_contains(self):
        outer = Prefix.parse("10.0.0.0/8")
        assert outer.contains(Prefix.parse("10.1.2.0/24"))
        assert not outer.contains(Prefix.parse("11.0.0.0/24"))
        assert Prefix.parse("0.0.0.0/0").contains(outer)
        assert Prefix.parse("0.0.0.0/0").is_default


def brute_force_addresses(prefixes):
    covered = set()
    for p in prefixes:
        covered.update(range(p.network, p.network + p.address_count()))
    return len(covered)


prefix_strategy = st.builds(
    lambda base, length: Prefix((base >> (32 - length)) << (32 - length), length),
    st.integers(0, 2**16 - 1).map(lambda x: (10 << 24) | x),
    st.integers(18, 32),
)


class TestAddressCount:
    def test_examples(self):
        assert address_count({Prefix.parse("10.0.0.0/24")}) == 256
        assert address_count({Prefix.parse("10.0.0.0/24"), Prefix.parse("10.0.0.0/25")}) == 256
        assert address_count({Prefix.parse("2.176.0.0/12")}) == 1_048_576

    def test_sum_mode(self):
        ps = {Prefix.parse("10.0.0.0/24"), Prefix.parse("10.0.0.0/25")}
        assert address_count(ps, union=False) == 384

    def test_adjacent_blocks_merge(self):
        ps = {Prefix.parse("10.0.0.0/25"), Prefix.parse("10.0.0.128/25")}
        assert address_count(ps) == 256

    def test_empty(self):
        assert address_count([]) == 0

    @given(st.lists(prefix_strategy, max_size=8))
    def test_matches_enumeration(self, prefixes):
        assert address_count(prefixes) == brute_force_addresses(prefixes)

    @given(st.lists(prefix_strategy, max_size=6), st.lists(prefix_strategy, max_size=6))
    def test_monotone_and_bounded(self, a, b):
        union = address_count(a + b)
        assert union >= max(address_count(a), address_count(b))
        assert union <= address_count(a + b, union=False) <= sum(p.address_count() for p in a + b)


class TestSnapshot:
    def test_collectors_derived(self):
        s = Snapshot("2020-01", (route("1 2", collector="a"), route("1 3", collector="b")))
        assert s.collectors == {"a", "b"}
        assert s.active_origins() == {2, 3}

    @pytest.mark.parametrize("label", ["2020-13", "2020", "20-01", "2020-1"])
    def test_bad_label(self, label):
        with pytest.raises(ValueError):
            Snapshot(label, ())

    def test_collector_set_must_cover_entries(self):
        with pytest.raises(ValueError):
            Snapshot("2020-01", (route("1 2", collector="a"),), frozenset({"b"}))


def test_route_line_round_trip():
    e = route("1 2 2 3", prefix="10.1.0.0/16", collector="rv2")
    assert e.to_line() == "1500000000|rv2|1|10.1.0.0/16|1 2 2 3"


def test_all_digit_strings_parse():
    for n in range(1, 4):
        for digits in itertools.product("019", repeat=n):
            s = "".join(digits)
            assert parse_path(s).tokens[0].value == int(s)
