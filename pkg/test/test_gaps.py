import json

import pytest

from comic2seed import gaps
from comic2seed.gaps import A, B, GapError, GapSet


def test_values_are_validated():
    with pytest.raises(GapError):
        GapSet(0.1, 1.2, 0.5, 0.5)
    with pytest.raises(GapError):
        GapSet(0.1, -0.1, 0.5, 0.5)
    with pytest.raises(GapError):
        GapSet("x", 0.5, 0.5, 0.5)


def test_parse_csv():
    assert GapSet.parse("0.1,0.75,0.5,0.75") == GapSet(0.1, 0.75, 0.5, 0.75)
    with pytest.raises(GapError):
        GapSet.parse("0.1,0.75,0.5")


def test_parse_json():
    text = json.dumps({"qA0": 0.2, "qAB": 0.4, "qB0": 0.6, "qBA": 0.8})
    assert GapSet.parse(text) == GapSet(0.2, 0.4, 0.6, 0.8)
    with pytest.raises(GapError):
        GapSet.parse('{"qA0": 0.2}')
    with pytest.raises(GapError):
        GapSet.parse("{not json")


def test_parse_learned_document():
    doc = {
        "qA0": {"est": 0.75, "n": 60},
        "qAB": {"est": 0.85, "n": 40},
        "qB0": {"est": None, "n": 0},
        "qBA": {"est": 0.97, "n": 12},
    }
    with pytest.raises(GapError):
        GapSet.from_mapping(doc)
    assert GapSet.from_mapping(doc, default=0.5) == GapSet(0.75, 0.85, 0.5, 0.97)


def test_preset():
    assert GapSet.parse("preset:learned-1") == GapSet(0.75, 0.85, 0.92, 0.97)
    with pytest.raises(GapError):
        GapSet.parse("preset:nope")


def test_classify_regime():
    assert GapSet(0.1, 0.75, 0.5, 0.75).regime() == gaps.MUTUAL_COMPLEMENT
    assert GapSet(1, 0, 1, 0).regime() == gaps.MUTUAL_COMPETE
    assert GapSet(0.3, 0.3, 0.7, 0.7).regime() == gaps.INDEPENDENT
    assert GapSet(0.3, 0.8, 0.5, 0.5).regime() == gaps.ONE_WAY_B_TO_A
    assert GapSet(0.3, 0.3, 0.2, 0.6).regime() == gaps.ONE_WAY_A_TO_B
    assert GapSet(0.3, 0.8, 0.6, 0.2).regime() == gaps.MIXED


def test_regime_membership_counts_equalities():
    q = GapSet(0.3, 0.3, 0.7, 0.7)
    assert gaps.is_mutual_complement(q)
    assert gaps.is_mutual_compete(q)


def test_reconsideration_prob():
    assert GapSet(0.3, 0.8, 0.5, 0.5).rho(A) == pytest.approx(0.5 / 0.7)
    assert GapSet(0.8, 0.3, 0.5, 0.5).rho(A) == 0.0
    assert GapSet(1.0, 0.2, 0.5, 0.5).rho(A) == 0.0
    assert GapSet(0.3, 0.8, 0.2, 0.6).rho(B) == pytest.approx(0.5)


def test_reconsideration_restores_given_other():
    for q in [GapSet(0.3, 0.8, 0.1, 0.9), GapSet(0.0, 1.0, 0.5, 0.75)]:
        for item in (A, B):
            alone = q.alone(item)
            assert alone + (1 - alone) * q.rho(item) == pytest.approx(q.given_other(item))


def test_compatibility():
    assert gaps.selfinfmax_compatible(GapSet(0.3, 0.8, 0.5, 0.5))
    assert not gaps.selfinfmax_compatible(GapSet(0.3, 0.8, 0.5, 0.75))
    assert not gaps.selfinfmax_compatible(GapSet(0.8, 0.3, 0.5, 0.5))
    assert gaps.compinfmax_compatible(GapSet(0.3, 0.8, 0.5, 1.0))
    assert not gaps.compinfmax_compatible(GapSet(0.3, 0.8, 0.5, 0.9))


def test_replace_revalidates():
    q = GapSet(0.3, 0.8, 0.1, 0.96)
    assert q.replace(q_b0=0.96) == GapSet(0.3, 0.8, 0.96, 0.96)
    with pytest.raises(GapError):
        q.replace(q_ab=2.0)


def test_str_and_dict():
    q = GapSet(0.1, 0.75, 0.5, 0.75)
    assert GapSet.parse(str(q)) == q
    assert q.to_dict() == {"qA0": 0.1, "qAB": 0.75, "qB0": 0.5, "qBA": 0.75}


def test_check_problem():
    assert gaps.check_problem("selfinfmax") == gaps.SELFINFMAX
    with pytest.raises(GapError):
        gaps.check_problem("maxinf")


def test_presets_are_valid():
    for name in gaps.PRESETS:
        q = GapSet.preset(name)
        assert q.regime() in (
            gaps.MUTUAL_COMPLEMENT, gaps.ONE_WAY_A_TO_B, gaps.ONE_WAY_B_TO_A, gaps.INDEPENDENT
        )
