import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bgptypo import TypoClassifier, TypoCleaner, TypoScanner
from bgptypo.validation import check_candidates, check_entries

from conftest import route


def test_get_params_round_trip(whitelist):
    s = TypoScanner(small_asn_range=(1, 15), whitelist=whitelist)
    params = s.get_params()
    assert params["small_asn_range"] == (1, 15) and params["whitelist"] is whitelist
    assert clone(s).get_params()["small_asn_range"] == (1, 15)
    c = TypoClassifier(enable_geo=False).set_params(enable_inactive=False)
    assert c.get_params()["enable_inactive"] is False


@pytest.mark.parametrize("call", [
    lambda: TypoScanner().transform([]),
    lambda: TypoScanner().scan_entry(route("1 2")),
    lambda: TypoClassifier().predict([]),
    lambda: TypoCleaner().transform([]),
])
def test_not_fitted(call):
    with pytest.raises(NotFittedError):
        call()


def test_scanner_transform(quoted_snapshot, whitelist):
    cs = TypoScanner(whitelist=whitelist).fit(quoted_snapshot).transform(quoted_snapshot)
    assert cs.counts()[1] == 4


def test_scanner_accepts_lines(whitelist):
    lines = ["1|rv2|3741|2.58.168.0/22|3741 29278 29728 29278 29278", "# comment"]
    cs = TypoScanner(whitelist=whitelist).fit(lines).transform(lines)
    assert cs.counts()[2] == 1


def test_scanner_builds_whitelist_from_ownership(quoted_snapshot, ownership):
    s = TypoScanner(ownership=ownership).fit(quoted_snapshot)
    assert len(s.whitelist_) == 0
    assert s.config_.small_asn_range == (1, 12)


def test_scanner_without_data_warns(quoted_snapshot, caplog):
    TypoScanner().fit(quoted_snapshot)
    assert "whitelist" in caplog.text


def test_classifier(quoted_snapshot, ownership, registry, adjacency, whitelist):
    cands = TypoScanner(whitelist=whitelist).fit(quoted_snapshot).transform(quoted_snapshot)
    clf = TypoClassifier(ownership, registry, adjacency).fit(quoted_snapshot)
    assert 42864 in clf.active_origins_
    verdicts = clf.predict(cands)
    assert all(v.is_typo for v in verdicts)
    assert clf.score(cands, [True] * len(cands)) == 1.0


def test_cleaner(quoted_snapshot, ownership, registry, adjacency, whitelist):
    cleaner = TypoCleaner(TypoScanner(whitelist=whitelist),
                          TypoClassifier(ownership, registry, adjacency)).fit(quoted_snapshot)
    out = cleaner.transform(quoted_snapshot)
    assert len(out) == len(quoted_snapshot)
    assert cleaner.n_changed_ == 11
    by_prefix = {str(e.prefix): str(e.path) for e in out}
    assert by_prefix["103.49.56.0/24"] == "57463 9498 133718 133718"
    assert by_prefix["202.56.168.0/23"] == "18351 131758 131758 131758"
    again = cleaner.transform(out)
    assert [str(e.path) for e in again] == [str(e.path) for e in out]


def test_cleaner_does_not_mutate_components(whitelist):
    scanner = TypoScanner(whitelist=whitelist)
    TypoCleaner(scanner).fit([route("1 2 3")])
    assert not hasattr(scanner, "whitelist_")


def test_input_validation():
    with pytest.raises(TypeError):
        check_entries("1|rv2|1|10.0.0.0/8|1 2")
    with pytest.raises(TypeError):
        check_entries([42])
    with pytest.raises(TypeError):
        check_candidates([route("1 2")])
