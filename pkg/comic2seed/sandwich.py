"""Sandwich approximation for mutually complementary GAPs

Outside the regimes where the objective is submodular, seeds are picked for
two bounding GapSets (mu below, nu above) with GeneralTIM and for the
original GapSet with Monte Carlo greedy. The candidate with the highest
estimated objective under the original GAPs wins.
"""
import logging
import math
from collections import namedtuple

from comic2seed.baselines import greedy_mc
from comic2seed.gaps import (
    COMPINFMAX,
    SELFINFMAX,
    check_problem,
    compinfmax_compatible,
    is_mutual_complement,
    selfinfmax_compatible,
)
from comic2seed.model import estimate_boost, estimate_spread
from comic2seed.tim import RegimeError, general_tim


log = logging.getLogger(__name__)

UPPER = "upper"
LOWER = "lower"

# argmax ties resolve in this order
CANDIDATES = ("s_sigma", "s_nu", "s_mu")


class SandwichReport(namedtuple(
    "SandwichReport",
    ["s_mu", "s_sigma", "s_nu", "sigma_of_each", "nu_of_s_nu", "ratio_nu", "chosen", "sa_error", "epsilon"],
)):
    __slots__ = ()

    @property
    def implied_factor(self):
        """ratio_nu * (1 - 1/e - epsilon)"""
        return self.ratio_nu * (1.0 - 1.0 / math.e - self.epsilon)

    @property
    def chosen_name(self):
        for name in CANDIDATES:
            if getattr(self, name) == self.chosen:
                return name

    def to_json(self):
        return {
            "s_mu": self.s_mu,
            "s_sigma": self.s_sigma,
            "s_nu": self.s_nu,
            "sigma_of_each": dict(self.sigma_of_each),
            "nu_of_s_nu": self.nu_of_s_nu,
            "ratio_nu": self.ratio_nu,
            "implied_factor": self.implied_factor,
            "chosen": self.chosen,
            "chosen_name": self.chosen_name,
            "sa_error": self.sa_error,
        }


def bound_gaps(q, problem, side):
    """Bounding GapSet of q for one side of the sandwich

    :param q: GapSet in Q+
    :param problem: selfinfmax or compinfmax
    :param side: "upper" or "lower"

    :return: GapSet, or None for the compinfmax lower side, which has no bound
    """
    check_problem(problem)
    if side not in (UPPER, LOWER):
        raise ValueError("side must be %r or %r, got %r" % (UPPER, LOWER, side))
    if not is_mutual_complement(q):
        raise RegimeError("sandwich bounds need mutually complementary GAPs, got %s" % (q,))
    if problem == SELFINFMAX:
        if side == UPPER:
            return q.replace(q_b0=q.q_ba)
        return q.replace(q_ba=q.q_b0)
    if side == UPPER:
        return q.replace(q_ba=1.0)
    return None


def _objective(g, q, problem, fixed_seeds, seeds, mc_iters, master_seed, workers):
    if problem == SELFINFMAX:
        return estimate_spread(g, q, seeds, fixed_seeds, mc_iters, master_seed, workers).sigma_a
    return estimate_boost(g, q, fixed_seeds, seeds, mc_iters, master_seed, workers).boost


def sandwich_select(g, q, problem, fixed_seeds, params, mc_iters, master_seed,
                    greedy_iters=None, workers=1):
    """Best of the lower-bound, upper-bound and greedy seed sets

    Every candidate is evaluated with the same master seed, so all of them
    see the same Monte Carlo streams.

    Args:
        params (TimParams): k, epsilon and ell for the bound problems
        mc_iters (int): simulations per candidate evaluation
        greedy_iters (int): sampled worlds for the greedy candidate,
            mc_iters when None

    Returns:
        SandwichReport
    """
    check_problem(problem)
    upper = bound_gaps(q, problem, UPPER)
    lower = bound_gaps(q, problem, LOWER)
    if (selfinfmax_compatible(q) if problem == SELFINFMAX else compinfmax_compatible(q)):
        log.warning("%s is already in the submodular regime for %s, sandwich adds nothing", q, problem)
    fixed_seeds = sorted(set(fixed_seeds))
    greedy_iters = greedy_iters or mc_iters

    s_nu, _ = general_tim(g, upper, problem, fixed_seeds, params, master_seed, workers=workers)
    s_mu = None
    if lower is not None:
        s_mu, _ = general_tim(g, lower, problem, fixed_seeds, params, master_seed, workers=workers)
    s_sigma = greedy_mc(g, q, problem, fixed_seeds, params.k, greedy_iters, master_seed, workers=workers)

    candidates = {"s_sigma": s_sigma, "s_nu": s_nu, "s_mu": s_mu}
    sigma_of_each = {}
    for name in CANDIDATES:
        seeds = candidates[name]
        if seeds is None:
            continue
        sigma_of_each[name] = _objective(g, q, problem, fixed_seeds, seeds, mc_iters, master_seed, workers)
        log.info("sandwich candidate %s: %.4f", name, sigma_of_each[name])

    best = CANDIDATES[0]
    for name in CANDIDATES[1:]:
        if name in sigma_of_each and sigma_of_each[name] > sigma_of_each[best]:
            best = name

    nu_of_s_nu = _objective(g, upper, problem, fixed_seeds, s_nu, mc_iters, master_seed, workers)
    ratio_nu = sigma_of_each["s_nu"] / nu_of_s_nu if nu_of_s_nu > 0 else 1.0
    base = sigma_of_each["s_sigma"]
    deviation = max(abs(base - v) for v in sigma_of_each.values())
    sa_error = deviation / base if base > 0 else 0.0
    return SandwichReport(
        s_mu=s_mu,
        s_sigma=s_sigma,
        s_nu=s_nu,
        sigma_of_each=sigma_of_each,
        nu_of_s_nu=nu_of_s_nu,
        ratio_nu=ratio_nu,
        chosen=candidates[best],
        sa_error=sa_error,
        epsilon=params.epsilon,
    )
