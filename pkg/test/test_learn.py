import pytest

from comic2seed import learn
from comic2seed.baselines import high_degree
from comic2seed.gaps import GAP_KEYS, GapSet
from comic2seed.graph import powerlaw_graph
from comic2seed.learn import INFORM, RATE, ActionLogError


def _log(lines):
    return learn.parse_action_log(lines)


def test_rate_implies_inform():
    action_log = _log(["7\tX\trate\t100"])
    assert len(action_log) == 2
    assert action_log.times("X", INFORM).to_dict() == {"7": 100}
    assert action_log.times("X", RATE).to_dict() == {"7": 100}


def test_inform_only():
    action_log = _log(["# header", "", "7\tX\tinform\t3"])
    assert len(action_log) == 1
    assert action_log.times("X", RATE).empty


def test_empty_log():
    action_log = _log([])
    assert len(action_log) == 0
    assert action_log.items == []
    with pytest.raises(ActionLogError):
        learn.learn_gaps(action_log, "X", "Y")


def test_log_errors():
    with pytest.raises(ActionLogError, match="line 2"):
        _log(["u\tX\trate\t1", "u\tX\tclick\t2"])
    with pytest.raises(ActionLogError, match="line 1"):
        _log(["u\tX\trate"])
    with pytest.raises(ActionLogError, match="negative"):
        _log(["u\tX\trate\t-3"])
    with pytest.raises(ActionLogError, match="not an integer"):
        _log(["u\tX\trate\tnoon"])
    with pytest.raises(ActionLogError, match="before being informed"):
        _log(["u\tX\tinform\t10", "u\tX\trate\t5"])
    with pytest.raises(ActionLogError, match="two rate records"):
        _log(["u\tX\trate\t1", "u\tX\trate\t4"])


def test_adoption_rate_alone():
    records = [("u%d" % i, "X", INFORM, 1) for i in range(60)]
    records += [("u%d" % i, "X", RATE, 2) for i in range(45)]
    records.append(("b", "Y", RATE, 1))
    learned = learn.learn_gaps(learn.ActionLog.from_records(records), "X", "Y")
    assert learned.estimates["qA0"] == pytest.approx(0.75)
    assert learned.sizes["qA0"] == 60
    assert learned.estimates["qB0"] == pytest.approx(1.0)
    assert learned.undefined == ["qAB", "qBA"]


def test_precedence():
    action_log = _log(["u\tY\trate\t5", "u\tX\tinform\t7", "u\tX\trate\t9"])
    learned = learn.learn_gaps(action_log, "X", "Y")
    assert learned.estimates["qAB"] == 1.0
    assert learned.sizes["qAB"] == 1
    assert learned.estimates["qA0"] is None
    assert learned.estimates["qB0"] == 1.0
    assert learned.estimates["qBA"] is None


def test_swapping_items():
    action_log = _log([
        "u\tY\trate\t5", "u\tX\tinform\t7", "u\tX\trate\t9",
        "v\tX\trate\t1", "v\tY\tinform\t2",
        "w\tX\tinform\t3", "w\tY\trate\t4",
    ])
    forward = learn.learn_gaps(action_log, "X", "Y")
    backward = learn.learn_gaps(action_log, "Y", "X")
    for a, b in (("qA0", "qB0"), ("qAB", "qBA")):
        assert forward.estimates[a] == backward.estimates[b]
        assert forward.sizes[a] == backward.sizes[b]


def test_confidence_interval():
    lo, hi = learn.confidence_interval(0.5, 100)
    assert lo == pytest.approx(0.402)
    assert hi == pytest.approx(0.598)
    assert learn.confidence_interval(1.0, 10) == (1.0, 1.0)
    assert learn.confidence_interval(0.0, 10) == (0.0, 0.0)
    lo, hi = learn.confidence_interval(0.88, 2000)
    assert (hi - lo) / 2 == pytest.approx(0.01424, abs=1e-5)
    assert learn.confidence_interval(0.3, 0) is None
    with pytest.raises(ValueError):
        learn.confidence_interval(1.5, 10)


def test_undefined_gaps_need_a_default():
    learned = learn.learn_gaps(_log(["u\tY\trate\t5", "u\tX\tinform\t7", "u\tX\trate\t9"]), "X", "Y")
    with pytest.raises(learn.UndefinedGapError):
        learned.to_gapset()
    assert learned.to_gapset(default=0.5) == GapSet(0.5, 1.0, 1.0, 0.5)
    doc = learned.to_json()
    assert doc["qA0"] == {"est": None, "n": 0, "lo": None, "hi": None}
    assert doc["qAB"]["n"] == 1


def test_write_and_load(tmp_path):
    action_log = _log(["u\tY\trate\t5", "u\tX\tinform\t7", "u\tX\trate\t9", "v\tX\tinform\t2"])
    path = str(tmp_path / "actions.tsv")
    learn.write_action_log(action_log, path)
    again = learn.load_action_log(path)
    rows = lambda a: sorted(map(tuple, a.frame[learn.COLUMNS].values.tolist()))
    assert rows(again) == rows(action_log)


def test_synthetic_logs_recover_the_gaps():
    q = GapSet.preset("learned-1")
    g = powerlaw_graph(300, master_seed=1)
    top = high_degree(g, 10)
    covered = dict.fromkeys(GAP_KEYS, 0)
    replications = 20
    for r in range(replications):
        action_log = learn.synthesize_action_log(g, q, top[:5], top[5:], runs=100, master_seed=r)
        learned = learn.learn_gaps(action_log, "A", "B")
        for key, truth in zip(GAP_KEYS, q):
            interval = learned.intervals[key]
            if interval is not None and interval[0] <= truth <= interval[1]:
                covered[key] += 1
    for key in GAP_KEYS:
        assert covered[key] >= 15, (key, covered[key])
