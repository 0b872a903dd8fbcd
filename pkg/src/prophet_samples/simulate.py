"""Seeded Monte Carlo runs of policies, and the sample-to-policy pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import Instance, ModelKind, exact_expected_max, sample
from .errors import ParameterError
from .estimation import (
    ClassificationResult,
    SampleMatrix,
    classify,
    estimate_distributions,
    sample_budget,
)
from .lp_policy import (
    RandomizedPolicy,
    attach_tail_rule,
    build_program,
    extract_policy,
    solve_lp,
)
from .reduction import AuxiliaryInstance, build_auxiliary, make_jitter

CSV_HEADER = "model,eps,n,episodes,seed,mean_reward,stderr,ratio,min_visit_freq,delta"

_MASK = (1 << 64) - 1


def derive_seed(master: int, index: int) -> int:
    """splitmix64 of (master, index): episode seeds independent of execution order."""
    z = (int(master) * 0x9E3779B97F4A7C15 + (int(index) + 1) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


@dataclass(frozen=True)
class EpisodeTrace:
    order: tuple[int, ...]
    stop_position: int | None  # 1-based position in ``order``
    reward: float
    visited: frozenset[int]
    off_support: int = 0


@dataclass(frozen=True)
class McStats:
    episodes: int
    mean_reward: float
    stderr: float
    visit_freq: dict[int, float]
    ratio: float
    off_support: int = 0

    @property
    def min_visit_freq(self) -> float:
        return min(self.visit_freq.values())


def _draw_order(pol: RandomizedPolicy, model: ModelKind, n: int, rng: np.random.Generator):
    """Realized index order and the policy context at each step (None for counts)."""
    if model is ModelKind.FIXED_ORDER:
        return tuple(range(n)), None
    if model is ModelKind.PROPHET_SECRETARY:
        return tuple(int(i) for i in rng.permutation(n)), None
    orders = sorted(pol.order_dist)
    weights = np.array([pol.order_dist[o] for o in orders])
    sigma = orders[int(rng.choice(len(orders), p=weights / weights.sum()))]
    pools = [list(rng.permutation(m)) for m in pol.members]
    cursor = [0] * len(pools)
    order = []
    for g in sigma:
        order.append(int(pools[g][cursor[g]]))
        cursor[g] += 1
    return tuple(order), sigma


def _episode(pol: RandomizedPolicy, inst: Instance, model: ModelKind, rng: np.random.Generator) -> EpisodeTrace:
    n = inst.n
    if pol.n != n:
        raise ParameterError(f"policy covers {pol.n} variables, instance has {n}")
    if (model is ModelKind.FREE_ORDER) != (pol.kind is ModelKind.FREE_ORDER):
        raise ParameterError(f"a {pol.kind.value} policy cannot run under the {model.value} model")
    order, sigma = _draw_order(pol, model, n, rng)
    counts = list(pol.multiplicity)
    off = 0
    for t, i in enumerate(order):
        g = pol.roles[i]
        ctx = (t, sigma) if sigma is not None else tuple(counts)
        d = inst[i]
        x = sample(d, rng)
        accept, was_off = pol.act(ctx, g, x, rng)
        off += was_off
        if accept:
            return EpisodeTrace(order, t + 1, x, frozenset(order[: t + 1]), off)
        counts[g] -= 1
    return EpisodeTrace(order, None, 0.0, frozenset(order), off)


def run_episode(pol: RandomizedPolicy, inst: Instance, model: ModelKind, seed: int) -> EpisodeTrace:
    return _episode(pol, inst, model, np.random.default_rng(seed))


def monte_carlo(pol: RandomizedPolicy, inst: Instance, model: ModelKind, episodes: int, seed: int) -> McStats:
    if episodes < 1:
        raise ParameterError("episodes must be at least 1")
    rewards = np.empty(episodes)
    visits = np.zeros(inst.n)
    off = 0
    for e in range(episodes):
        tr = _episode(pol, inst, model, np.random.default_rng(derive_seed(seed, e)))
        rewards[e] = tr.reward
        visits[list(tr.visited)] += 1
        off += tr.off_support
    mean = float(rewards.mean())
    stderr = float(rewards.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    emax = exact_expected_max(inst)
    return McStats(
        episodes=episodes,
        mean_reward=mean,
        stderr=stderr,
        visit_freq={i: float(v / episodes) for i, v in enumerate(visits)},
        ratio=mean / emax if emax > 0 else 1.0,
        off_support=off,
    )


# -- pipeline -------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    policy: RandomizedPolicy
    classification: ClassificationResult
    auxiliary: AuxiliaryInstance
    delta: float
    notes: tuple[str, ...] = field(default_factory=tuple)


def pipeline_from_samples(samples: SampleMatrix, eps: float, model: ModelKind, smooth: bool = False,
                          smooth_seed: int = 0) -> PipelineResult:
    """Samples -> classification -> auxiliary instance -> reduced LP -> wrapped policy.

    With ``smooth`` the row after the budget is the prior draw that sets the
    jitter width; jitter is added to every sample and, at run time, to every
    realization.
    """
    if model not in (ModelKind.PROPHET_SECRETARY, ModelKind.FREE_ORDER):
        raise ParameterError("the pipeline synthesizes prophet-secretary or free-order policies")
    budget = sample_budget(eps)
    notes = []
    jitter = None
    if smooth:
        if samples.k < budget.total + 1:
            raise ParameterError("smoothing needs one extra sample row for the jitter width")
        xstar = float(samples.values[budget.total].max())
        if xstar > 0:
            jitter = make_jitter(eps, xstar)
            rng = np.random.default_rng(derive_seed(smooth_seed, -1))
            rows = samples.values[: budget.total]
            samples = SampleMatrix(rows + jitter.draw(rng, size=rows.shape))
        else:
            notes.append("smoothing skipped: prior draw of the maximum is 0")

    cls = classify(samples, eps, budget)
    G_hat, large_emp = estimate_distributions(samples, cls, eps, budget)
    aux = build_auxiliary(samples.n, cls, G_hat, large_emp)
    sol = solve_lp(build_program(aux.inst, model, reduced=True))
    pol = extract_policy(sol)
    pol = attach_tail_rule(pol, dict(enumerate(aux.thresholds)))
    pol = replace(pol, roles=aux.roles, floor=cls.T, p_keep=1.0 / (1.0 + eps), jitter=jitter)
    return PipelineResult(policy=pol, classification=cls, auxiliary=aux, delta=sol.delta, notes=tuple(notes))


def draw_pipeline_samples(true_inst: Instance, eps: float, seed: int, smooth: bool = False) -> SampleMatrix:
    rows = sample_budget(eps).total + (1 if smooth else 0)
    return SampleMatrix.draw(true_inst, rows, np.random.default_rng(seed))


def run_pipeline(true_inst: Instance, eps: float, model: ModelKind, seed: int, smooth: bool = False,
                 detailed: bool = False):
    """Draw the sample budget from ``true_inst`` and build the policy from samples alone."""
    samples = draw_pipeline_samples(true_inst, eps, seed, smooth)
    res = pipeline_from_samples(samples, eps, model, smooth=smooth, smooth_seed=seed)
    return res if detailed else res.policy


def csv_row(model: ModelKind, eps: float, n: int, stats: McStats, seed: int, delta: float) -> str:
    return (f"{model.value},{eps:.6f},{n},{stats.episodes},{seed},{stats.mean_reward:.6f},"
            f"{stats.stderr:.6f},{stats.ratio:.6f},{stats.min_visit_freq:.6f},{delta:.6f}")
