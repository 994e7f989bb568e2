import copy
import json
import logging
import os

from pykwalify.core import Core
from pykwalify.errors import PyKwalifyException

from comic2seed.gaps import GapSet


log = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "schema.yaml")

SEED_SOURCES = ("none", "file", "vanilla_ic_range", "random", "top_k")

# values used when neither the config file nor the command line sets them
DEFAULTS = {
    "project": {"name": "comic2seed", "workspace": "./comic2seed_result"},
    "graph": {"has_probs": True, "undirected": False, "relabel": False, "weighted_cascade": False},
    "gaps": {"value": "preset:synthetic"},
    "seeds": {"source": "none", "first": 101, "last": 200, "count": 50},
    "selection": {"problem": "selfinfmax", "k": 50, "epsilon": 0.5, "ell": 1.0, "exclude_fixed": False},
    "evaluation": {"mc_iters": 10000, "greedy_iters": 1000},
    "run": {},
}


class ConfigFileException(ValueError):
    """Run configuration is not YAML, fails the schema or breaks a cross-field rule"""


class Config(object):
    def __init__(self, conf):
        self._config = conf

    def get_property(self, section, property_name):
        """get property from the config, falling back to the defaults"""
        value = self._config.get(section, {}).get(property_name)
        if value is None:
            value = DEFAULTS.get(section, {}).get(property_name)
        return value

    def set_property(self, section, property_name, value):
        self._config.setdefault(section, {})[property_name] = value

    def as_dict(self):
        merged = copy.deepcopy(DEFAULTS)
        for section, values in self._config.items():
            merged.setdefault(section, {}).update(values)
        return merged


class RunConfig(Config):
    @property
    def name(self):
        """get project name"""
        return self.get_property("project", "name")

    @property
    def workspace(self):
        """get project workspace"""
        return self.get_property("project", "workspace")

    @property
    def graph_path(self):
        return self.get_property("graph", "path")

    @property
    def has_probs(self):
        """whether edge lines carry a probability column"""
        return self.get_property("graph", "has_probs")

    @property
    def undirected(self):
        return self.get_property("graph", "undirected")

    @property
    def relabel(self):
        """map sparse node ids to 0..n-1"""
        return self.get_property("graph", "relabel")

    @property
    def weighted_cascade(self):
        """replace edge probabilities by 1 / in-degree"""
        return self.get_property("graph", "weighted_cascade")

    @property
    def gaps_value(self):
        """GAP string: four numbers, JSON, or preset:<name>"""
        return self.get_property("gaps", "value")

    @property
    def gaps_path(self):
        """learned-gaps JSON file"""
        return self.get_property("gaps", "path")

    @property
    def gaps_default(self):
        """substitute for undefined learned GAPs"""
        return self.get_property("gaps", "default")

    @property
    def gaps(self):
        """get GapSet; an explicit gaps.value wins over the learned-gaps file"""
        if self.gaps_path and "value" not in self._config.get("gaps", {}):
            with open(self.gaps_path) as f:
                return GapSet.from_mapping(json.load(f), self.gaps_default)
        return GapSet.parse(str(self.gaps_value))

    @property
    def seed_source(self):
        return self.get_property("seeds", "source")

    @property
    def seed_path(self):
        return self.get_property("seeds", "path")

    @property
    def seed_range(self):
        """1-based inclusive ranks of the VanillaIC order"""
        return self.get_property("seeds", "first"), self.get_property("seeds", "last")

    @property
    def seed_count(self):
        """size of a random or top_k fixed-seed set"""
        return self.get_property("seeds", "count")

    @property
    def problem(self):
        return self.get_property("selection", "problem")

    @property
    def k(self):
        return self.get_property("selection", "k")

    @property
    def epsilon(self):
        return self.get_property("selection", "epsilon")

    @property
    def ell(self):
        return self.get_property("selection", "ell")

    @property
    def generator(self):
        """RR-set generator, the problem default when None"""
        return self.get_property("selection", "generator")

    @property
    def exclude_fixed(self):
        return self.get_property("selection", "exclude_fixed")

    @property
    def theta(self):
        return self.get_property("selection", "theta")

    @property
    def lb(self):
        return self.get_property("selection", "lb")

    @property
    def mc_iters(self):
        return self.get_property("evaluation", "mc_iters")

    @property
    def greedy_iters(self):
        return self.get_property("evaluation", "greedy_iters")

    @property
    def seed(self):
        """master seed, None until generated"""
        return self.get_property("run", "seed")

    @property
    def workers(self):
        workers = self.get_property("run", "workers")
        return workers or os.cpu_count() or 1

    def check(self):
        """cross-field rules the schema cannot express"""
        source = self.seed_source
        if source == "file" and not self.seed_path:
            raise ConfigFileException("seeds.source file needs seeds.path")
        if source != "file" and self.seed_path:
            raise ConfigFileException("seeds.path is only used with seeds.source file, got source %s" % source)
        first, last = self.seed_range
        if source == "vanilla_ic_range" and not 1 <= first <= last:
            raise ConfigFileException("seed rank range %d..%d is empty" % (first, last))
        return self


def merge(conf, overrides):
    """copy of conf with the non-None override values applied

    :param overrides: {section: {name: value}}
    """
    merged = copy.deepcopy(conf) if conf else {}
    for section, values in overrides.items():
        for name, value in values.items():
            if value is not None:
                merged.setdefault(section, {})[name] = value
    return merged


class Parser(object):
    """Config Parser, parse yaml config and return RunConfig"""

    def __init__(self, config_path=None, schema_path=SCHEMA_PATH):
        self.config_path = config_path
        self.schema_path = schema_path

    def _validate(self, source):
        try:
            c = Core(source_data=source, schema_files=[self.schema_path])
            c.validate(raise_exception=True)
        except PyKwalifyException as e:
            raise ConfigFileException("invalid configuration: %s" % e.msg)
        return c.source

    def parse(self, overrides=None):
        """parse yaml config, apply command-line overrides and validate the result"""
        if self.schema_path.split(".")[-1].lower() != "yaml":
            raise ConfigFileException("Only support YAML schema!")
        conf = {}
        if self.config_path is not None:
            if self.config_path.split(".")[-1].lower() != "yaml":
                raise ConfigFileException("Only support YAML config!")
            try:
                c = Core(source_file=self.config_path, schema_files=[self.schema_path])
                c.validate(raise_exception=True)
            except PyKwalifyException as e:
                raise ConfigFileException("invalid configuration %s: %s" % (self.config_path, e.msg))
            conf = c.source or {}
        if overrides:
            conf = merge(conf, overrides)
        if conf:
            conf = self._validate(conf)
        log.debug("configuration: %s", conf)
        return RunConfig(conf).check()


class workspace(object):
    """Output folders of a project"""

    def __init__(self, root):
        self.workspace = root
        self.seeds = os.path.join(self.workspace, "seeds")
        self.spread = os.path.join(self.workspace, "spread")
        self.gaps = os.path.join(self.workspace, "gaps")
        self.bench = os.path.join(self.workspace, "bench")
        self.rrsets = os.path.join(self.workspace, "rrsets")
        for directory in self.__dict__:
            path = self.__dict__[directory]
            if not os.path.exists(path):
                os.makedirs(path, exist_ok=True)
