import json
import logging
import os
import pprint
import sys
import time
from functools import wraps

import click
import numpy as np
import pandas as pd

from comic2seed.baselines import METHODS, BaselineSpec, high_degree, random_seeds, select_baseline
from comic2seed.config import SCHEMA_PATH, SEED_SOURCES, ConfigFileException, Parser, workspace
from comic2seed.gaps import (
    COMPINFMAX,
    PROBLEMS,
    SELFINFMAX,
    compinfmax_compatible,
    is_mutual_complement,
    selfinfmax_compatible,
)
from comic2seed.graph import assign_weighted_cascade, load_edge_list, powerlaw_graph
from comic2seed.learn import learn_gaps, load_action_log, synthesize_action_log, write_action_log
from comic2seed.model import estimate_boost, estimate_spread
from comic2seed.rrset import COUNTERS, DEFAULT_GENERATOR, GENERATORS, generate_rrsets
from comic2seed.sandwich import UPPER, bound_gaps, sandwich_select
from comic2seed.tim import RegimeError, TimParams, general_tim, vanilla_ic_order
from comic2seed.utils import STREAM_FIXED_SEEDS, STREAM_RRSET, sig


log = logging.getLogger(__name__)

CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])

SPREAD_COLUMNS = ["k", "sigma_a", "stderr_a", "sigma_b", "stderr_b"]

# command-line option -> (config section, field)
OPTION_FIELDS = {
    "workspace": ("project", "workspace"),
    "graph": ("graph", "path"),
    "probs": ("graph", "has_probs"),
    "undirected": ("graph", "undirected"),
    "relabel": ("graph", "relabel"),
    "weighted_cascade": ("graph", "weighted_cascade"),
    "gaps": ("gaps", "value"),
    "learned_gaps": ("gaps", "path"),
    "gap_default": ("gaps", "default"),
    "fixed_source": ("seeds", "source"),
    "fixed_seeds": ("seeds", "path"),
    "fixed_first": ("seeds", "first"),
    "fixed_last": ("seeds", "last"),
    "fixed_count": ("seeds", "count"),
    "problem": ("selection", "problem"),
    "k": ("selection", "k"),
    "epsilon": ("selection", "epsilon"),
    "ell": ("selection", "ell"),
    "generator": ("selection", "generator"),
    "exclude_fixed": ("selection", "exclude_fixed"),
    "theta": ("selection", "theta"),
    "lb": ("selection", "lb"),
    "mc_iters": ("evaluation", "mc_iters"),
    "greedy_iters": ("evaluation", "greedy_iters"),
    "seed": ("run", "seed"),
    "workers": ("run", "workers"),
}


class CliConfig(object):
    def __init__(self, verbose, config, schema):
        self.verbose = verbose
        self.config = config
        self.schema = schema

    def load(self, options, randomized=True):
        """RunConfig of the config file with the command-line options applied

        A randomized command without a master seed gets a fresh one, which is
        printed so the run can be repeated.
        """
        overrides = {}
        for name, value in options.items():
            if name in OPTION_FIELDS and value is not None:
                section, field = OPTION_FIELDS[name]
                overrides.setdefault(section, {})[field] = value
        if options.get("fixed_seeds") and options.get("fixed_source") is None:
            overrides["seeds"]["source"] = "file"
        cfg = Parser(self.config, self.schema).parse(overrides)
        if randomized and cfg.seed is None:
            seed = int(np.random.SeedSequence().entropy % 2 ** 31)
            cfg.set_property("run", "seed", seed)
            print("No --seed given, using seed {}".format(seed))
        return cfg


def _error_module(e):
    if isinstance(e, OSError):
        return "io"
    module = type(e).__module__
    if module.startswith("comic2seed."):
        return module.rsplit(".", 1)[-1]
    return "cli"


def reports_errors(f):
    """print validation failures as error[<module>]: <message> and exit with 2"""

    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ValueError, OSError) as e:
            log.debug("command failed", exc_info=True)
            click.echo("error[{}]: {}".format(_error_module(e), e), err=True)
            sys.exit(2)

    return wrapper


def _options(*options):
    def decorator(f):
        for option in reversed(options):
            f = option(f)
        return f

    return decorator


graph_options = _options(
    click.option("--graph", "-g", type=click.Path(exists=True), help="Tab separated edge list"),
    click.option("--probs/--no-probs", default=None, help="Edge lines carry a probability"),
    click.option("--undirected/--directed", default=None, help="Read each line as two arcs"),
    click.option("--relabel/--no-relabel", default=None, help="Map sparse node ids to 0..n-1"),
    click.option("--weighted-cascade/--given-probs", default=None, help="Use 1/in-degree edge probabilities"),
)

gap_options = _options(
    click.option("--gaps", "-q", type=str, help='"qA0,qAB,qB0,qBA", a JSON object or preset:<name>'),
    click.option("--learned-gaps", type=click.Path(exists=True), help="JSON written by learn-gaps"),
    click.option("--gap-default", type=float, help="Value for undefined learned GAPs"),
)

fixed_options = _options(
    click.option("--fixed-seeds", "--b-seeds", "--a-seeds", "fixed_seeds", type=click.Path(exists=True),
                 help="Seed file of the opposite item"),
    click.option("--fixed-source", type=click.Choice(SEED_SOURCES), help="Where the opposite seeds come from"),
    click.option("--fixed-first", type=int, help="First VanillaIC rank of the opposite seeds (1-based)"),
    click.option("--fixed-last", type=int, help="Last VanillaIC rank of the opposite seeds"),
    click.option("--fixed-count", type=int, help="Number of random or top_k opposite seeds"),
)

selection_options = _options(
    click.option("--k", "-k", type=int, help="Number of seeds to select"),
    click.option("--epsilon", type=float),
    click.option("--ell", type=float),
    click.option("--generator", type=click.Choice(sorted(GENERATORS)), help="RR-set generator"),
    click.option("--exclude-fixed/--allow-fixed", default=None, help="Never select the opposite seeds"),
    click.option("--theta", type=int, help="Fixed number of RR-sets"),
    click.option("--lb", type=float, help="Fixed lower bound of the optimum"),
)

run_options = _options(
    click.option("--mc-iters", type=int, help="Monte Carlo simulations per estimate"),
    click.option("--greedy-iters", type=int, help="Sampled worlds of the greedy baseline"),
    click.option("--seed", "-s", type=int, help="Master seed of all random streams"),
    click.option("--workers", "-w", type=int, help="Worker processes"),
    click.option("--workspace", type=str, help="Output folder"),
)


def load_graph(cfg):
    if not cfg.graph_path:
        raise ConfigFileException("no graph given, use --graph or graph.path")
    g = load_edge_list(cfg.graph_path, cfg.has_probs, cfg.undirected, cfg.relabel)
    if cfg.weighted_cascade or not g.has_probs:
        g = assign_weighted_cascade(g)
    print("Loaded graph {} with {} nodes and {} edges".format(cfg.graph_path, g.n, g.m))
    return g


def load_seeds(path):
    """node list of a seed file, either a JSON list or a seeds document"""
    with open(path) as f:
        doc = json.load(f)
    seeds = doc["seeds"] if isinstance(doc, dict) else doc
    return [int(v) for v in seeds]


def write_json(doc, path):
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
    print("Wrote {}".format(os.path.abspath(path)))


def resolve_fixed_seeds(cfg, g):
    """opposite-item seeds, in selection order"""
    source = cfg.seed_source
    if source == "none":
        return []
    if source == "file":
        seeds = load_seeds(cfg.seed_path)
        g.check_nodes(seeds, "fixed seed")
        return seeds
    if source == "vanilla_ic_range":
        first, last = cfg.seed_range
        if last > g.n:
            raise ConfigFileException("VanillaIC rank {} exceeds the {} nodes".format(last, g.n))
        print("Ranking nodes with VanillaIC for the fixed seeds {}..{}".format(first, last))
        order = vanilla_ic_order(g, last, TimParams(last, cfg.epsilon, cfg.ell), cfg.seed, cfg.workers)
        return order[first - 1:last]
    if source == "random":
        return random_seeds(g, cfg.seed_count, cfg.seed, tag=STREAM_FIXED_SEEDS)
    return high_degree(g, cfg.seed_count)


def tim_params(cfg):
    return TimParams(cfg.k, cfg.epsilon, cfg.ell, cfg.theta, cfg.lb)


def _spread_row(g, q, problem, fixed, seeds, cfg):
    if problem == SELFINFMAX:
        est = estimate_spread(g, q, seeds, fixed, cfg.mc_iters, cfg.seed, cfg.workers)
    else:
        est = estimate_spread(g, q, fixed, seeds, cfg.mc_iters, cfg.seed, cfg.workers)
    row = {"k": len(seeds), "sigma_a": est.sigma_a, "stderr_a": est.stderr_a,
           "sigma_b": est.sigma_b, "stderr_b": est.stderr_b}
    if problem == COMPINFMAX:
        boost = estimate_boost(g, q, fixed, seeds, cfg.mc_iters, cfg.seed, cfg.workers)
        row["boost"] = boost.boost
        row["stderr_boost"] = boost.stderr
    return row


def write_table(rows, path, columns):
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(path, index=False, float_format="%.6g")
    print(frame.to_string(index=False))
    print("Wrote {}".format(os.path.abspath(path)))
    return frame


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option("--verbose", "-v", is_flag=True, default=False)
@click.option("--config", type=click.Path(exists=True), default=None, help="YAML run configuration")
@click.option("--schema", type=click.Path(exists=True), default=SCHEMA_PATH)
@click.pass_context
def cli(ctx, verbose, config, schema):
    """
    Seed selection for complementary products under the Com-IC model
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    ctx.obj = CliConfig(verbose, config, schema)


@cli.command(help="Estimate A- and B-spread of given seed sets")
@graph_options
@gap_options
@click.option("--a-seeds", "a_seeds", type=click.Path(exists=True), help="A-seed file")
@click.option("--b-seeds", "b_seeds", type=click.Path(exists=True), help="B-seed file")
@click.option("--boost", is_flag=True, default=False, help="Also estimate the boost of the B-seeds")
@run_options
@click.option("--out", "-o", type=click.Path(), help="Spread CSV")
@click.pass_obj
@reports_errors
def simulate(config, a_seeds, b_seeds, boost, out, **options):
    cfg = config.load(options)
    ws = workspace(cfg.workspace)
    g = load_graph(cfg)
    q = cfg.gaps
    seeds_a = load_seeds(a_seeds) if a_seeds else []
    seeds_b = load_seeds(b_seeds) if b_seeds else []
    print("Simulating {} cascades with GAPs {}".format(cfg.mc_iters, q))
    est = estimate_spread(g, q, seeds_a, seeds_b, cfg.mc_iters, cfg.seed, cfg.workers)
    row = {"k": len(seeds_a), "sigma_a": est.sigma_a, "stderr_a": est.stderr_a,
           "sigma_b": est.sigma_b, "stderr_b": est.stderr_b}
    columns = list(SPREAD_COLUMNS)
    if boost:
        b = estimate_boost(g, q, seeds_a, seeds_b, cfg.mc_iters, cfg.seed, cfg.workers)
        row.update(boost=b.boost, stderr_boost=b.stderr)
        columns += ["boost", "stderr_boost"]
    write_table([row], out or os.path.join(ws.spread, "simulate.csv"), columns)


def dump_rrset_sample(g, q, problem, fixed, cfg, count, ws):
    """write the first ``count`` RR-sets of a GeneralTIM run, one JSON object per line"""
    generator = cfg.generator or DEFAULT_GENERATOR[problem]
    sets = generate_rrsets(g, q, frozenset(fixed), generator, 0, count, cfg.seed, STREAM_RRSET, cfg.workers)
    path = os.path.join(ws.rrsets, "{}.jsonl".format(problem))
    with open(path, "w") as f:
        for rr in sets:
            f.write(rr.to_json() + "\n")
    print("Wrote {}".format(os.path.abspath(path)))


def run_selection(config, problem, out, options, dump_rrsets=0):
    options["problem"] = problem
    cfg = config.load(options)
    ws = workspace(cfg.workspace)
    g = load_graph(cfg)
    q = cfg.gaps
    fixed = resolve_fixed_seeds(cfg, g)
    params = tim_params(cfg)
    doc = {
        "problem": problem,
        "params": {"k": params.k, "epsilon": params.epsilon, "ell": params.ell,
                   "seed": cfg.seed, "gaps": q.to_dict(), "regime": q.regime()},
        "fixed_seeds": fixed,
    }
    compatible = selfinfmax_compatible(q) if problem == SELFINFMAX else compinfmax_compatible(q)
    if compatible:
        exclude = fixed if cfg.exclude_fixed else ()
        print("Selecting {} seeds for {} with GeneralTIM".format(params.k, problem))
        seeds, stats = general_tim(g, q, problem, fixed, params, cfg.seed, cfg.generator, exclude, cfg.workers)
        doc["params"]["generator"] = cfg.generator
        doc["stats"] = dict(stats._asdict())
        print("theta={} LB={} time={}ms".format(stats.theta, sig(stats.lb), sig(stats.wall_time_ms)))
        if dump_rrsets > 0:
            dump_rrset_sample(g, q, problem, fixed, cfg, dump_rrsets, ws)
    elif is_mutual_complement(q):
        if dump_rrsets > 0:
            log.warning("RR-sets are only dumped for GeneralTIM runs")
        print("GAPs {} are not submodular for {}, using the sandwich approximation".format(q, problem))
        report = sandwich_select(g, q, problem, fixed, params, cfg.mc_iters, cfg.seed,
                                 cfg.greedy_iters, cfg.workers)
        seeds = report.chosen
        doc["sandwich"] = report.to_json()
        print("ratio_nu={} implied factor={} chosen={}".format(
            sig(report.ratio_nu, 3), sig(report.implied_factor, 3), report.chosen_name))
    else:
        raise RegimeError("GAPs {} are not mutually complementary; {} has no approximation "
                          "guarantee there".format(q, problem))
    doc["seeds"] = seeds
    write_json(doc, out or os.path.join(ws.seeds, "{}.json".format(problem)))


@cli.command(help="Select A-seeds maximizing the A-spread")
@graph_options
@gap_options
@fixed_options
@selection_options
@run_options
@click.option("--out", "-o", type=click.Path(), help="Seeds JSON")
@click.option("--dump-rrsets", type=int, default=0, help="Write the first N RR-sets to the workspace")
@click.pass_obj
@reports_errors
def selfinfmax(config, out, dump_rrsets, **options):
    run_selection(config, SELFINFMAX, out, options, dump_rrsets)


@cli.command(help="Select B-seeds maximizing the boost of the A-spread")
@graph_options
@gap_options
@fixed_options
@selection_options
@run_options
@click.option("--out", "-o", type=click.Path(), help="Seeds JSON")
@click.option("--dump-rrsets", type=int, default=0, help="Write the first N RR-sets to the workspace")
@click.pass_obj
@reports_errors
def compinfmax(config, out, dump_rrsets, **options):
    run_selection(config, COMPINFMAX, out, options, dump_rrsets)


@cli.command(help="Select seeds with a baseline method")
@click.option("--method", "-m", type=click.Choice(METHODS), required=True)
@click.option("--problem", "-p", type=click.Choice(PROBLEMS))
@graph_options
@gap_options
@fixed_options
@selection_options
@click.option("--damping", type=float, default=0.85, help="PageRank damping")
@click.option("--pr-iters", type=int, default=100, help="PageRank power iterations")
@run_options
@click.option("--out", "-o", type=click.Path(), help="Seeds JSON")
@click.pass_obj
@reports_errors
def baseline(config, method, damping, pr_iters, out, **options):
    cfg = config.load(options)
    ws = workspace(cfg.workspace)
    g = load_graph(cfg)
    q = cfg.gaps
    problem = cfg.problem
    fixed = resolve_fixed_seeds(cfg, g)
    spec = BaselineSpec(method, damping, pr_iters, cfg.greedy_iters)
    exclude = fixed if cfg.exclude_fixed and method != "copying" else ()
    print("Selecting {} seeds for {} with {}".format(cfg.k, problem, method))
    seeds = select_baseline(spec, g, q, problem, fixed, cfg.k, cfg.seed, tim_params(cfg), exclude, cfg.workers)
    doc = {
        "problem": problem,
        "method": method,
        "params": {"k": cfg.k, "seed": cfg.seed, "gaps": q.to_dict()},
        "fixed_seeds": fixed,
        "seeds": seeds,
    }
    write_json(doc, out or os.path.join(ws.seeds, "{}_{}.json".format(problem, method)))


@cli.command(name="eval", help="Estimate the spread of a seeds file")
@click.option("--seeds", "seeds_path", type=click.Path(exists=True), required=True, help="Seeds JSON")
@click.option("--compare", type=click.Path(exists=True), help="Seeds JSON to compare against")
@click.option("--problem", "-p", type=click.Choice(PROBLEMS), help="Defaults to the seeds file's problem")
@click.option("--prefix", "prefixes", type=int, multiple=True, help="Evaluate the first k seeds; repeatable")
@graph_options
@gap_options
@fixed_options
@run_options
@click.option("--out", "-o", type=click.Path(), help="Spread CSV")
@click.pass_obj
@reports_errors
def evaluate(config, seeds_path, compare, problem, prefixes, out, **options):
    with open(seeds_path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        doc = {"seeds": doc}
    problem = problem or doc.get("problem") or SELFINFMAX
    if problem not in PROBLEMS:
        raise ConfigFileException("unknown problem {!r} in {}".format(problem, seeds_path))
    options["problem"] = problem
    cfg = config.load(options)
    ws = workspace(cfg.workspace)
    g = load_graph(cfg)
    q = cfg.gaps
    seeds = [int(v) for v in doc["seeds"]]
    g.check_nodes(seeds, "seed")
    given = options.get("fixed_seeds") or options.get("fixed_source")
    if given or "fixed_seeds" not in doc:
        fixed = resolve_fixed_seeds(cfg, g)
    else:
        fixed = [int(v) for v in doc["fixed_seeds"]]
    other = load_seeds(compare) if compare else None
    columns = list(SPREAD_COLUMNS)
    if problem == COMPINFMAX:
        columns += ["boost", "stderr_boost"]
    if other is not None:
        columns.append("improvement_pct")
    objective = "sigma_a" if problem == SELFINFMAX else "boost"
    rows = []
    for k in sorted(set(prefixes)) or [len(seeds)]:
        if not 0 < k <= len(seeds):
            raise ConfigFileException("prefix {} outside 1..{}".format(k, len(seeds)))
        row = _spread_row(g, q, problem, fixed, seeds[:k], cfg)
        if other is not None:
            base = _spread_row(g, q, problem, fixed, other[:k], cfg)[objective]
            row["improvement_pct"] = sig(100.0 * (row[objective] - base) / base, 3) if base else ""
        rows.append(row)
    name = os.path.splitext(os.path.basename(seeds_path))[0]
    write_table(rows, out or os.path.join(ws.spread, "{}.csv".format(name)), columns)


@cli.command(name="learn-gaps", help="Learn GAPs from an action log")
@click.option("--log", "log_path", type=click.Path(exists=True), help="TSV action log")
@click.option("--synthetic", is_flag=True, default=False, help="Learn from simulated cascades instead")
@click.option("--item-a", default="A", show_default=True)
@click.option("--item-b", default="B", show_default=True)
@click.option("--runs", type=int, default=2000, show_default=True, help="Simulated cascades")
@click.option("--seed-count", type=int, default=10, show_default=True, help="Seeds per item when simulating")
@click.option("--nodes", type=int, default=1000, show_default=True, help="Power-law graph size without --graph")
@graph_options
@gap_options
@click.option("--seed", "-s", type=int, help="Master seed of all random streams")
@click.option("--workspace", type=str, help="Output folder")
@click.option("--out", "-o", type=click.Path(), help="Learned GAPs JSON")
@click.pass_obj
@reports_errors
def learn(config, log_path, synthetic, item_a, item_b, runs, seed_count, nodes, out, **options):
    if bool(log_path) == synthetic:
        raise ConfigFileException("give exactly one of --log and --synthetic")
    cfg = config.load(options, randomized=synthetic)
    ws = workspace(cfg.workspace)
    if synthetic:
        g = load_graph(cfg) if cfg.graph_path else powerlaw_graph(nodes, master_seed=cfg.seed)
        q = cfg.gaps
        top = high_degree(g, 2 * seed_count)
        print("Simulating {} cascades on {} nodes with GAPs {}".format(runs, g.n, q))
        action_log = synthesize_action_log(g, q, top[0::2], top[1::2], runs, cfg.seed, (item_a, item_b))
        write_action_log(action_log, os.path.join(ws.gaps, "actions.tsv"))
    else:
        action_log = load_action_log(log_path)
    learned = learn_gaps(action_log, item_a, item_b)
    doc = learned.to_json()
    for key, entry in doc.items():
        if entry["est"] is None:
            print("{}: undefined (no samples)".format(key))
        else:
            print("{}: {} [{}, {}] n={}".format(key, sig(entry["est"], 3), sig(entry["lo"], 3),
                                               sig(entry["hi"], 3), entry["n"]))
    write_json(doc, out or os.path.join(ws.gaps, "gaps.json"))


@cli.command(help="Time GeneralTIM on power-law graphs")
@click.option("--nodes", "-n", "sizes", type=int, multiple=True, help="Graph sizes; repeatable")
@click.option("--exponent", type=float, default=2.16, show_default=True)
@click.option("--avg-degree", type=float, default=5.0, show_default=True)
@click.option("--problem", "-p", type=click.Choice(PROBLEMS))
@click.option("--fixed-count", type=int, help="Top out-degree nodes used as opposite seeds")
@gap_options
@selection_options
@run_options
@click.option("--out", "-o", type=click.Path(), help="Counters CSV")
@click.pass_obj
@reports_errors
def bench(config, sizes, exponent, avg_degree, out, **options):
    if options.get("gaps") is None and options.get("learned_gaps") is None:
        options["gaps"] = "preset:learned-1"
    cfg = config.load(options)
    ws = workspace(cfg.workspace)
    problem = cfg.problem
    q = cfg.gaps
    compatible = selfinfmax_compatible(q) if problem == SELFINFMAX else compinfmax_compatible(q)
    if not compatible:
        q = bound_gaps(q, problem, UPPER)
        print("Timing the upper-bound GAPs {}".format(q))
    rows = []
    for n in sizes or (200000, 400000):
        began = time.perf_counter()
        g = powerlaw_graph(n, exponent, avg_degree, cfg.seed)
        built = (time.perf_counter() - began) * 1000.0
        fixed = high_degree(g, cfg.seed_count)
        print("Graph with {} nodes and {} edges built in {}ms".format(g.n, g.m, sig(built)))
        _, stats = general_tim(g, q, problem, fixed, tim_params(cfg), cfg.seed, cfg.generator,
                               workers=cfg.workers)
        row = {"nodes": g.n, "edges": g.m, "problem": problem}
        row.update(stats._asdict())
        rows.append(row)
    columns = ["nodes", "edges", "problem", "theta", "lb"] + list(COUNTERS) + ["wall_time_ms"]
    frame = write_table(rows, out or os.path.join(ws.bench, "counters.csv"), columns)
    if len(frame) > 1:
        ratio = frame["wall_time_ms"].iloc[-1] / frame["wall_time_ms"].iloc[0]
        print("wall time ratio {} for {}x nodes".format(sig(ratio, 3), sig(frame["nodes"].iloc[-1] / frame["nodes"].iloc[0], 3)))


@cli.command(help="Print project config")
@graph_options
@gap_options
@fixed_options
@selection_options
@run_options
@click.pass_obj
@reports_errors
def printcfg(config, **options):
    cfg = config.load(options, randomized=False)
    pprint.pprint(cfg.as_dict())
