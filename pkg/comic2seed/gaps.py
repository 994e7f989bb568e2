"""Global adoption probabilities and their regimes"""
import json
import logging
from collections import namedtuple


log = logging.getLogger(__name__)

A = 0
B = 1
ITEMS = (A, B)
ITEM_NAMES = ("A", "B")

TOLERANCE = 1e-12

MUTUAL_COMPLEMENT = "mutual_complement"
MUTUAL_COMPETE = "mutual_compete"
ONE_WAY_B_TO_A = "one_way_complement_B_to_A"
ONE_WAY_A_TO_B = "one_way_complement_A_to_B"
MIXED = "mixed"
INDEPENDENT = "independent"

GAP_KEYS = ("qA0", "qAB", "qB0", "qBA")


class GapError(ValueError):
    """GAP values must be four probabilities"""


def other(item):
    return 1 - item


def _le(x, y):
    return x <= y + TOLERANCE


def _eq(x, y):
    return abs(x - y) <= TOLERANCE


class GapSet(namedtuple("GapSet", ["q_a0", "q_ab", "q_b0", "q_ba"])):
    """Q = (q_{A|0}, q_{A|B}, q_{B|0}, q_{B|A})"""

    __slots__ = ()

    def __new__(cls, q_a0, q_ab, q_b0, q_ba):
        values = []
        for name, x in zip(GAP_KEYS, (q_a0, q_ab, q_b0, q_ba)):
            try:
                x = float(x)
            except (TypeError, ValueError):
                raise GapError("%s=%r is not a number" % (name, x))
            if not 0.0 <= x <= 1.0:
                raise GapError("%s=%r outside [0, 1]" % (name, x))
            values.append(x)
        return super(GapSet, cls).__new__(cls, *values)

    def alone(self, item):
        """adoption probability of item when the other item is not adopted"""
        return self.q_a0 if item == A else self.q_b0

    def given_other(self, item):
        """adoption probability of item when the other item is adopted"""
        return self.q_ab if item == A else self.q_ba

    def adopt_prob(self, item, other_adopted):
        return self.given_other(item) if other_adopted else self.alone(item)

    def regime(self):
        return classify_regime(self)

    def rho(self, item):
        return reconsideration_prob(self, item)

    def replace(self, **kwargs):
        fields = self._asdict()
        fields.update(kwargs)
        return GapSet(**fields)

    def to_dict(self):
        return dict(zip(GAP_KEYS, self))

    def __str__(self):
        return ",".join("%.9g" % x for x in self)

    @classmethod
    def parse(cls, text):
        """Parse "qA0,qAB,qB0,qBA", a JSON object or "preset:<name>"

        A JSON object may be a plain mapping of the four keys or a learned-gaps
        document whose values carry an "est" field.
        """
        text = text.strip()
        if text.startswith("preset:"):
            return cls.preset(text[len("preset:"):])
        if text.startswith("{"):
            try:
                doc = json.loads(text)
            except ValueError as e:
                raise GapError("invalid GAP JSON: %s" % e)
            return cls.from_mapping(doc)
        parts = text.split(",")
        if len(parts) != 4:
            raise GapError("expected four comma separated GAPs, got %r" % text)
        return cls(*parts)

    @classmethod
    def from_mapping(cls, doc, default=None):
        values = []
        for key in GAP_KEYS:
            if key not in doc:
                raise GapError("missing GAP %s" % key)
            x = doc[key]
            if isinstance(x, dict):
                x = x.get("est")
            if x is None:
                if default is None:
                    raise GapError("GAP %s is undefined and no default was given" % key)
                log.warning("GAP %s undefined, using default %r", key, default)
                x = default
            values.append(x)
        return cls(*values)

    @classmethod
    def preset(cls, name):
        try:
            return cls(*PRESETS[name])
        except KeyError:
            raise GapError("unknown GAP preset %r, choose from %s" % (name, ", ".join(sorted(PRESETS))))


def is_mutual_complement(q):
    """Q+ membership; equalities count"""
    return _le(q.q_a0, q.q_ab) and _le(q.q_b0, q.q_ba)


def is_mutual_compete(q):
    """Q- membership; equalities count"""
    return _le(q.q_ab, q.q_a0) and _le(q.q_ba, q.q_b0)


def classify_regime(q):
    """Most specific regime label of a GapSet

    Precedence is independent, then the one-way labels, then the mutual ones.
    """
    eq_a = _eq(q.q_a0, q.q_ab)
    eq_b = _eq(q.q_b0, q.q_ba)
    if eq_a and eq_b:
        return INDEPENDENT
    if eq_b and q.q_a0 < q.q_ab:
        return ONE_WAY_B_TO_A
    if eq_a and q.q_b0 < q.q_ba:
        return ONE_WAY_A_TO_B
    if is_mutual_complement(q):
        return MUTUAL_COMPLEMENT
    if is_mutual_compete(q):
        return MUTUAL_COMPETE
    return MIXED


def reconsideration_prob(q, item):
    """Probability that a suspended node adopts item right after adopting the other one

    rho = max(q_{X|Y} - q_{X|0}, 0) / (1 - q_{X|0}), and 0 when q_{X|0} = 1.
    """
    alone = q.alone(item)
    if alone >= 1.0 - TOLERANCE:
        return 0.0
    return max(q.given_other(item) - alone, 0.0) / (1.0 - alone)


def selfinfmax_compatible(q):
    """q_{A|0} <= q_{A|B} and q_{B|0} = q_{B|A}"""
    return _le(q.q_a0, q.q_ab) and _eq(q.q_b0, q.q_ba)


def compinfmax_compatible(q):
    """q_{A|0} <= q_{A|B}, q_{B|0} <= q_{B|A} = 1"""
    return _le(q.q_a0, q.q_ab) and _le(q.q_b0, q.q_ba) and _eq(q.q_ba, 1.0)


PRESETS = {
    "sim-a01": (0.1, 0.75, 0.5, 0.75),
    "sim-a03": (0.3, 0.75, 0.5, 0.75),
    "sim-a05": (0.5, 0.75, 0.5, 0.75),
    "cim-b01": (0.1, 0.9, 0.1, 0.9),
    "cim-b05": (0.1, 0.9, 0.5, 0.9),
    "cim-b08": (0.1, 0.9, 0.8, 0.9),
    "learned-1": (0.75, 0.85, 0.92, 0.97),
    "learned-2": (0.84, 0.89, 0.89, 0.95),
    "synthetic": (0.5, 0.75, 0.5, 0.75),
    "stress-sim-b01": (0.3, 0.8, 0.1, 1.0),
    "stress-sim-b05": (0.3, 0.8, 0.5, 1.0),
    "stress-sim-b09": (0.3, 0.8, 0.9, 1.0),
    "stress-sim96-b01": (0.3, 0.8, 0.1, 0.96),
    "stress-sim96-b05": (0.3, 0.8, 0.5, 0.96),
    "stress-sim96-b09": (0.3, 0.8, 0.9, 0.96),
    "stress-cim-ba01": (0.3, 0.8, 0.1, 0.1),
    "stress-cim-ba05": (0.3, 0.8, 0.1, 0.5),
    "stress-cim-ba09": (0.3, 0.8, 0.1, 0.9),
    "non-submodular": (0.078432, 0.24392, 0.37556, 0.99545),
}


SELFINFMAX = "selfinfmax"
COMPINFMAX = "compinfmax"
PROBLEMS = (SELFINFMAX, COMPINFMAX)


def check_problem(problem):
    if problem not in PROBLEMS:
        raise GapError("unknown problem %r, expected one of %s" % (problem, ", ".join(PROBLEMS)))
    return problem
