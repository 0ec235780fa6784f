import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgptypo import (
    OwnershipDb,
    Prefix,
    ScanConfig,
    Snapshot,
    UnsupportedPathError,
    UpstreamWhitelist,
    build_upstream_whitelist,
    ins_del_typo,
    missing_space_typo,
    scan_path_pairs,
    scan_snapshot,
    scan_type1,
    scan_type4_overflow,
    swap_typo,
)
from bgptypo.scan import CANDIDATE_FIELDS, pair_type, scan_entry

from conftest import route

EMPTY_WL = UpstreamWhitelist()


def transpositions(a):
    return {a[:i] + a[i + 1] + a[i] + a[i + 2:] for i in range(len(a) - 1)} - {a}


def deletions(a):
    return {a[:i] + a[i + 1:] for i in range(len(a))}


def digit_strings(alphabet, max_len):
    for n in range(1, max_len + 1):
        for t in itertools.product(alphabet, repeat=n):
            yield "".join(t)


digits = st.text("0123456789", min_size=1, max_size=6)


class TestPredicates:
    @pytest.mark.parametrize("a,b,expected", [
        ("29278", "29728", True),
        ("1234", "2134", True),
        ("1234", "12345", False),
        ("1234", "4321", False),
        ("11", "11", False),
    ])
    def test_swap(self, a, b, expected):
        assert swap_typo(a, b) is expected

    @pytest.mark.parametrize("a,b,expected", [
        ("39709", "3970", True),
        ("12880", "2880", True),
        ("26402", "264092", True),
        ("39709", "397", False),
        ("1234", "1243", False),
    ])
    def test_ins_del(self, a, b, expected):
        assert ins_del_typo(a, b) is expected

    @pytest.mark.parametrize("a,b,expected", [
        ("32026", "3202632026", True),
        ("1", "11", True),
        ("12", "121", False),
        ("7", "7", False),
    ])
    def test_missing_space(self, a, b, expected):
        assert missing_space_typo(a, b) is expected

    def test_precedence(self):
        # "1"/"11" is both a doubling and a single insertion
        assert ins_del_typo("1", "11") and missing_space_typo("1", "11")
        assert pair_type("1", "11") == 4
        assert pair_type("29278", "29728") == 2
        assert pair_type("39709", "3970") == 3
        assert pair_type("174", "3356") is None

    def test_exhaustive_oracle(self):
        strings = list(digit_strings("012", 4))
        for a in strings:
            swaps, dels = transpositions(a), deletions(a)
            for b in strings:
                if a == b:
                    continue
                assert swap_typo(a, b) == (b in swaps), (a, b)
                assert ins_del_typo(a, b) == (b in dels or a in deletions(b)), (a, b)
                assert missing_space_typo(a, b) == (b == a + a or a == b + b), (a, b)

    @given(digits, digits)
    def test_symmetry(self, a, b):
        assert swap_typo(a, b) == swap_typo(b, a)
        assert ins_del_typo(a, b) == ins_del_typo(b, a)
        assert missing_space_typo(a, b) == missing_space_typo(b, a)

    @given(digits, digits)
    def test_swap_and_ins_del_exclusive(self, a, b):
        assert not (swap_typo(a, b) and ins_del_typo(a, b))


class TestScanPathPairs:
    def test_swap_example(self):
        e = route("3741 9002 29278 29728 29278 29278 29278 29278 29278 42864")
        (c,) = scan_path_pairs(e)
        assert (c.typo_type, c.suspect.text, c.reference.text, c.position) == (2, "29728", "29278", 3)

    def test_ins_del_example(self):
        e = route("24441 6939 20764 39709 39709 3970 39709 39709")
        (c,) = scan_path_pairs(e)
        assert (c.typo_type, c.suspect.text, c.reference.text, c.position) == (3, "3970", "39709", 5)

    def test_missing_space_example(self):
        e = route("3356 32026 32026 32026 32026 32026 32026 3202632026 32026 32026 32026")
        (c,) = scan_path_pairs(e)
        assert (c.typo_type, c.suspect.text, c.reference.text, c.position) == (4, "3202632026", "32026", 7)

    def test_unrelated(self):
        assert scan_path_pairs(route("1 2 3")) == []

    def test_tie_breaks_right(self):
        (c,) = scan_path_pairs(route("174 29278 29728 3356"))
        assert c.suspect.text == "29728"

    def test_single_copy_beside_long_run(self):
        (c,) = scan_path_pairs(route("174 29728 29278 29278"))
        assert c.suspect.text == "29728" and c.position == 1

    def test_as_set(self):
        with pytest.raises(UnsupportedPathError):
            scan_path_pairs(route("1 {2,3} 4"))

    @given(st.lists(st.integers(1, 60), min_size=1, max_size=15))
    def test_no_self_pairs(self, values):
        e = route(" ".join(map(str, values)))
        for c in scan_entry(e, EMPTY_WL, ScanConfig(max_assigned_asn=50)):
            assert c.suspect.text != c.reference.text
            assert e.path.tokens[c.position].text == c.suspect.text


class TestScanType1:
    def test_quoted_examples(self):
        wl = UpstreamWhitelist({3: frozenset({174})})
        c = scan_type1(route("18351 131758 3"), wl)
        assert (c.typo_type, c.suspect.text, c.reference.text, c.position) == (1, "3", "131758", 2)
        c = scan_type1(route("57463 9498 133718 133718 2"), wl)
        assert c.suspect.text == "2" and c.reference.text == "133718"

    def test_whitelisted_upstream(self):
        wl = UpstreamWhitelist({3: frozenset({174})})
        assert scan_type1(route("3356 174 3"), wl) is None

    def test_origin_outside_range(self):
        assert scan_type1(route("1 2 13"), EMPTY_WL) is None
        cfg = ScanConfig(small_asn_range=(1, 15))
        assert scan_type1(route("198138 198138 15"), EMPTY_WL, cfg) is not None

    def test_short_path(self):
        assert scan_type1(route("3"), EMPTY_WL) is None
        assert scan_type1(route("3 3"), EMPTY_WL) is None

    def test_min_run(self):
        cfg = ScanConfig(min_run_for_type1=2)
        assert scan_type1(route("18351 131758 3"), EMPTY_WL, cfg) is None
        assert scan_type1(route("9498 133718 133718 2"), EMPTY_WL, cfg) is not None

    def test_count_annotation(self):
        c = scan_type1(route("31126 56902 56902 56902 3"), EMPTY_WL)
        assert c.prepend_count_matches() is True
        c = scan_type1(route("18351 131758 3"), EMPTY_WL)
        assert c.prepend_count_matches() is False


class TestScanType4:
    def test_quoted_token(self):
        (c,) = scan_type4_overflow(route("32026 3202632026 32026"))
        assert c.suspect.text == "3202632026" and c.reference.text == "32026"

    def test_threshold(self):
        assert scan_type4_overflow(route("1 499999 2")) == []
        assert scan_type4_overflow(route("1 500000 2")) == []
        assert len(scan_type4_overflow(route("1 500001 2"))) == 1

    def test_threshold_configurable(self):
        cfg = ScanConfig(max_assigned_asn=2**32 - 1)
        assert scan_type4_overflow(route("1 4200000000 2"), cfg) == []

    def test_reference_prefers_explaining_neighbour(self):
        (c,) = scan_type4_overflow(route("174 3202632026 32026"))
        assert c.reference.text == "32026"
        (c,) = scan_type4_overflow(route("174 9999999 3356"))
        assert c.reference.text == "174"

    def test_lonely_token(self):
        assert scan_type4_overflow(route("9999999 9999999")) == []


class TestScanSnapshot:
    def three_planted(self):
        return Snapshot("2019-12", (
            route("18351 131758 3", prefix="202.56.168.0/24"),
            route("3741 9002 29278 29728 29278 29278 42864", prefix="2.58.168.0/22"),
            route("24441 6939 20764 39709 39709 3970 39709 39709", prefix="81.88.208.0/20"),
        ))

    def test_one_per_type(self):
        cs = scan_snapshot(self.three_planted(), EMPTY_WL)
        assert cs.counts() == {1: 1, 2: 1, 3: 1, 4: 0}
        assert cs.summary() == "type1:1 type2:1 type3:1 type4:0"

    def test_clean(self):
        snap = Snapshot("2019-12", (route("174 3356 1299"), route("6939 2914")))
        assert len(scan_snapshot(snap, EMPTY_WL)) == 0

    def test_dedup_keeps_prefixes_distinct(self):
        path = "3741 29278 29728 29278 29278"
        entries = [route(path, prefix=f"10.0.{i}.0/24") for i in range(5)]
        entries += [route(path, prefix="10.0.0.0/24", collector="rv3")]
        cs = scan_snapshot(Snapshot("2019-12", tuple(entries)), EMPTY_WL)
        assert len(cs) == 5
        assert cs.candidates[0].entry.collector == "rv2"

    def test_missing_space_counted_once(self):
        e = route("3356 32026 32026 3202632026 32026")
        cs = scan_snapshot(Snapshot("2017-04", (e,)), EMPTY_WL)
        assert cs.counts()[4] == 1

    def test_as_set_skipped(self):
        snap = Snapshot("2019-12", (route("1 {2,3} 4"), route("29278 29728 29278 29278")))
        cs = scan_snapshot(snap, EMPTY_WL)
        assert cs.skipped_as_set == 1 and cs.scanned == 1 and len(cs) == 1

    def test_default_route_counted(self):
        snap = Snapshot("2019-12", (route("174 3356", prefix="0.0.0.0/0"),))
        assert scan_snapshot(snap, EMPTY_WL).default_routes == 1

    def test_csv(self):
        import io

        buf = io.StringIO()
        scan_snapshot(self.three_planted(), EMPTY_WL).write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == ",".join(CANDIDATE_FIELDS)
        assert lines[1] == "1,202.56.168.0/24,3,131758,2,rv2,18351,18351 131758 3"

    def test_workers_do_not_change_result(self, synthetic_corpus):
        snap = Snapshot("2020-05", synthetic_corpus.snapshot.entries[:4000])
        wl = UpstreamWhitelist()
        one = scan_snapshot(snap, wl, workers=1)
        three = scan_snapshot(snap, wl, workers=3)
        assert [c.row() for c in one] == [c.row() for c in three]

    @settings(max_examples=30)
    @given(st.lists(st.sampled_from(["29278", "29728", "3970", "39709", "174", "3"]),
                    min_size=2, max_size=10))
    def test_repeatable(self, values):
        snap = Snapshot("2019-12", (route(" ".join(values)),))
        a = scan_snapshot(snap, EMPTY_WL)
        b = scan_snapshot(snap, EMPTY_WL)
        assert [c.row() for c in a] == [c.row() for c in b]


class TestWhitelistBuilder:
    def test_owned_block_via_upstream(self):
        db = OwnershipDb({Prefix.parse("128.9.0.0/16"): {4}})
        snap = Snapshot("2020-01", (route("3356 226 4", prefix="128.9.0.0/16"),
                                    route("174 2152 226 4", prefix="128.9.1.0/24")))
        wl = build_upstream_whitelist([snap], db)
        assert wl[4] == {226}

    def test_ownership_mismatch_not_added(self):
        db = OwnershipDb({Prefix.parse("202.56.168.0/23"): {131758}})
        snap = Snapshot("2020-01", (route("18351 131758 3", prefix="202.56.168.0/24"),))
        wl = build_upstream_whitelist([snap], db)
        assert 131758 not in wl[3]

    def test_union_over_snapshots(self):
        db = OwnershipDb({Prefix.parse("18.0.0.0/8"): {3}})
        a = Snapshot("2020-01", (route("10578 3", prefix="18.0.0.0/8"),))
        b = Snapshot("2020-02", (route("174 3", prefix="18.1.0.0/16"),))
        assert build_upstream_whitelist([a, b], db)[3] == {10578, 174}

    def test_empty_warns(self, caplog):
        snap = Snapshot("2020-01", (route("174 3356"),))
        wl = build_upstream_whitelist([snap], OwnershipDb())
        assert len(wl) == 0
        assert "empty" in caplog.text

    def test_no_snapshots(self):
        with pytest.raises(ValueError):
            build_upstream_whitelist([], OwnershipDb())


def test_sandwich_of_single_copies_blames_both_right_tokens():
    # with equal run counts each pair blames its right-hand token
    got = sorted((c.suspect.text, c.reference.text) for c in scan_path_pairs(route("29278 29728 29278")))
    assert got == [("29278", "29728"), ("29728", "29278")]
