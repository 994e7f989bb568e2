"""Learning GAPs from timestamped action logs

A log holds (user, item, action, timestamp) records with action ``rate``
(adoption) or ``inform``. A rating implies the user was informed of the item,
so a rating without an inform record counts as both at the same timestamp.
"""
import logging
import math
from collections import namedtuple

import pandas as pd

from comic2seed.gaps import GAP_KEYS, GapError, GapSet
from comic2seed.model import ADOPT, INFORM, simulate
from comic2seed.utils import RandomStream, STREAM_SYNTHETIC


log = logging.getLogger(__name__)

RATE = "rate"
ACTIONS = (RATE, INFORM)
COLUMNS = ["user", "item", "action", "timestamp"]

Z_95 = 1.96


class ActionLogError(ValueError):
    """Malformed or inconsistent action log"""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = "line %d: %s" % (lineno, message)
        super(ActionLogError, self).__init__(message)
        self.lineno = lineno


class UndefinedGapError(GapError):
    """A learned GAP had no samples and no default was supplied"""


class ActionLog(object):
    """Action records in a DataFrame, one row per (user, item, action)

    Implied inform records are materialized, so ``times(item, INFORM)``
    covers every user who rated the item.
    """

    def __init__(self, frame):
        frame = frame[COLUMNS].copy()
        frame["timestamp"] = frame["timestamp"].astype("int64")
        dup = frame.duplicated(["user", "item", "action"])
        if dup.any():
            row = frame[dup].iloc[0]
            raise ActionLogError("user %s has two %s records for item %s" % (row.user, row.action, row.item))
        rates = frame[frame["action"] == RATE]
        informs = frame[frame["action"] == INFORM]
        pairs = rates[["user", "item"]].merge(informs[["user", "item"]], how="left", indicator=True)
        implied = rates[(pairs["_merge"] == "left_only").to_numpy()].copy()
        implied["action"] = INFORM
        self.frame = pd.concat([frame, implied], ignore_index=True)
        self._check()

    def _check(self):
        frame = self.frame
        if (frame["timestamp"] < 0).any():
            raise ActionLogError("timestamps must be non-negative")
        both = pd.merge(
            frame[frame["action"] == INFORM], frame[frame["action"] == RATE],
            on=["user", "item"], suffixes=("_inform", "_rate"),
        )
        late = both[both["timestamp_inform"] > both["timestamp_rate"]]
        if len(late):
            row = late.iloc[0]
            raise ActionLogError("user %s rated item %s before being informed of it" % (row.user, row.item))

    def __len__(self):
        return len(self.frame)

    @property
    def items(self):
        return sorted(self.frame["item"].unique())

    def times(self, item, action):
        """timestamps of one (item, action) as a Series indexed by user"""
        rows = self.frame[(self.frame["item"] == item) & (self.frame["action"] == action)]
        return rows.set_index("user")["timestamp"]

    @classmethod
    def from_records(cls, records):
        return cls(pd.DataFrame.from_records(list(records), columns=COLUMNS))


def parse_action_log(lines):
    """Build an ActionLog from "user<TAB>item<TAB>action<TAB>timestamp" lines"""
    records = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ActionLogError("expected 4 tab separated fields, got %d" % len(fields), lineno)
        user, item, action, stamp = (f.strip() for f in fields)
        if action not in ACTIONS:
            raise ActionLogError("unknown action %r, expected rate or inform" % action, lineno)
        try:
            stamp = int(stamp)
        except ValueError:
            raise ActionLogError("timestamp %r is not an integer" % stamp, lineno)
        if stamp < 0:
            raise ActionLogError("negative timestamp %d" % stamp, lineno)
        records.append((user, item, action, stamp))
    return ActionLog.from_records(records)


def load_action_log(path):
    with open(path) as f:
        action_log = parse_action_log(f)
    log.info("loaded %d action records from %s", len(action_log), path)
    return action_log


def confidence_interval(q_hat, n):
    """95% normal interval q_hat +- 1.96 sqrt(q_hat (1 - q_hat) / n), clipped to [0, 1]

    Returns None when n is 0.
    """
    if n == 0:
        return None
    if n < 0 or not 0.0 <= q_hat <= 1.0:
        raise ValueError("need q_hat in [0, 1] and n >= 1, got %r and %r" % (q_hat, n))
    half = Z_95 * math.sqrt(q_hat * (1.0 - q_hat) / n)
    return max(0.0, q_hat - half), min(1.0, q_hat + half)


class LearnedGaps(namedtuple("LearnedGaps", ["estimates", "sizes", "intervals"])):
    """Point estimates, sample sizes and 95% intervals keyed by GAP name

    Undefined GAPs carry None as estimate and interval.
    """

    __slots__ = ()

    @property
    def undefined(self):
        return [key for key in GAP_KEYS if self.estimates[key] is None]

    def to_json(self):
        doc = {}
        for key in GAP_KEYS:
            lo, hi = self.intervals[key] or (None, None)
            doc[key] = {"est": self.estimates[key], "n": self.sizes[key], "lo": lo, "hi": hi}
        return doc

    def to_gapset(self, default=None):
        if self.undefined and default is None:
            raise UndefinedGapError("GAPs %s have no samples; supply a default" % ", ".join(self.undefined))
        return GapSet.from_mapping(self.to_json(), default)


def _precedes(first, then):
    """users present in both Series whose ``first`` time is strictly earlier"""
    both = pd.concat([first.rename("first"), then.rename("then")], axis=1, join="inner")
    return set(both.index[both["first"] < both["then"]])


def _item_gaps(action_log, x, y):
    """(alone, given_other) estimate pieces for item x with respect to item y"""
    rated_x = set(action_log.times(x, RATE).index)
    informed_x = set(action_log.times(x, INFORM).index)
    rate_y = action_log.times(y, RATE)
    y_before_rate = _precedes(rate_y, action_log.times(x, RATE))
    y_before_inform = _precedes(rate_y, action_log.times(x, INFORM))
    alone = (len(rated_x - y_before_rate), len(informed_x - y_before_inform))
    given = (len(y_before_rate & y_before_inform), len(y_before_inform))
    return alone, given


def learn_gaps(action_log, item_a, item_b):
    """Estimate the four GAPs of an item pair

    q_{A|0} = |R_A minus R_{B<A}| / |I_A minus R_{B<I_A}| and
    q_{A|B} = |R_{B<A} and R_{B<I_A}| / |R_{B<I_A}|, where R_{B<A} holds the
    users who rated B strictly before A and R_{B<I_A} those who rated B
    strictly before being informed of A. The B GAPs swap the roles.

    :return: LearnedGaps
    """
    items = set(action_log.items)
    for item in (item_a, item_b):
        if item not in items:
            raise ActionLogError("item %r does not appear in the log" % item)
    a_alone, a_given = _item_gaps(action_log, item_a, item_b)
    b_alone, b_given = _item_gaps(action_log, item_b, item_a)
    estimates, sizes, intervals = {}, {}, {}
    for key, (hits, n) in zip(GAP_KEYS, (a_alone, a_given, b_alone, b_given)):
        sizes[key] = n
        estimates[key] = hits / float(n) if n else None
        intervals[key] = confidence_interval(estimates[key], n) if n else None
        if not n:
            log.warning("GAP %s has no samples", key)
    return LearnedGaps(estimates, sizes, intervals)


def synthesize_action_log(g, q, seeds_a, seeds_b, runs, master_seed, item_names=("A", "B")):
    """Action log of ``runs`` simulated cascades

    Node v in run r becomes user "r:v"; seed nodes are left out. Timestamps
    follow the global event order, so precedence in the log is the order in
    which the cascade made its decisions.
    """
    seeds = set(seeds_a) | set(seeds_b)
    records = []
    clock = 0
    for r in range(runs):
        out = simulate(g, q, seeds_a, seeds_b, RandomStream(master_seed, STREAM_SYNTHETIC, r), record_events=True)
        for event in out.events:
            if event.node in seeds:
                continue
            action = RATE if event.action == ADOPT else INFORM
            records.append(("%d:%d" % (r, event.node), item_names[event.item], action, clock + event.seq))
        clock += len(out.events)
    log.info("synthesized %d action records from %d runs", len(records), runs)
    return ActionLog.from_records(records)


def write_action_log(action_log, path):
    """Write a log as TSV, implied inform records included"""
    action_log.frame[COLUMNS].sort_values(["timestamp", "action"]).to_csv(
        path, sep="\t", header=False, index=False
    )
