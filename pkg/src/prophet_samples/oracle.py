"""Exact small-instance computations.

Optimal values by dynamic programming, exact evaluation of any
:class:`RandomizedPolicy` by forward recursion over its states, and
enumeration-based checks of the inequalities the pipeline relies on. All
arithmetic is plain float64.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import (
    DiscreteDistribution,
    Instance,
    ModelKind,
    cdf,
    cdf_left,
    exact_expected_max,
    expected_above,
    expected_max_with,
    geometric_mean_cdf,
)
from .errors import ParameterError, PolicyCoverageError, PreconditionError, SizeGuardError
from .estimation import multiplicative_band_check
from .lp_policy.policy import RandomizedPolicy, all_states, support_of, without
from .reduction import filtered_distribution

MAX_SUBSET_N = 12
MAX_FIXED_N = 20
MAX_FO_N = 8
MAX_ENUM_N = 6


@dataclass(frozen=True)
class EvalReport:
    expected_reward: float
    visit_prob: dict[int, float]
    ratio: float

    @property
    def min_visit(self) -> float:
        return min(self.visit_prob.values())


# -- optimal values -------------------------------------------------------------


def optimal_ps_value_subset(inst: Instance) -> float:
    """V(S) = (1/|S|) sum_{i in S} E[max(X_i, V(S - i))] over bitmasks."""
    n = inst.n
    if n > MAX_SUBSET_N:
        raise SizeGuardError(f"subset DP limited to n <= {MAX_SUBSET_N}")
    V = [0.0] * (1 << n)
    for S in range(1, 1 << n):
        members = [i for i in range(n) if S >> i & 1]
        V[S] = sum(expected_max_with(inst[i], V[S & ~(1 << i)]) for i in members) / len(members)
    return V[-1]


def optimal_ps_value_multiset(inst: Instance) -> float:
    """Same recursion keyed by remaining multiplicity per group."""
    groups = inst.groups()
    if len(groups) > MAX_SUBSET_N:
        raise SizeGuardError(f"multiset DP limited to {MAX_SUBSET_N} distinct variables")
    dists = [inst[g[0]] for g in groups]
    mult = [len(g) for g in groups]
    V: dict = {}
    for S in sorted(all_states(mult), key=sum):
        size = sum(S)
        if size == 0:
            V[S] = 0.0
            continue
        V[S] = sum(S[g] * expected_max_with(dists[g], V[without(S, g)]) for g in support_of(S)) / size
    return V[tuple(mult)]


def optimal_ps_value(inst: Instance) -> float:
    if inst.num_iid_prefix >= 2 or inst.n > MAX_SUBSET_N:
        return optimal_ps_value_multiset(inst)
    return optimal_ps_value_subset(inst)


def optimal_fixed_order_value(inst: Instance, order: Sequence[int]) -> float:
    """Backward induction along a fixed arrival order (0-based indices)."""
    if inst.n > MAX_FIXED_N:
        raise SizeGuardError(f"fixed-order DP limited to n <= {MAX_FIXED_N}")
    if sorted(order) != list(range(inst.n)):
        raise ParameterError(f"{order!r} is not a permutation of 0..{inst.n - 1}")
    return _backward(inst, order)


def _backward(inst: Instance, order: Sequence[int]) -> float:
    v = 0.0
    for i in reversed(order):
        v = expected_max_with(inst[i], v)
    return v


def optimal_fo_value(inst: Instance) -> float:
    """Best fixed order; orders that only permute identical variables are skipped."""
    if inst.n > MAX_FO_N and inst.num_iid_prefix < 2:
        raise SizeGuardError(f"free-order enumeration limited to n <= {MAX_FO_N}")
    from .lp_policy.policy import multiset_orderings

    groups = inst.groups()
    best = -math.inf
    count = 0
    for seq in multiset_orderings([len(g) for g in groups]):
        cursor = [0] * len(groups)
        order = []
        for g in seq:
            order.append(groups[g][cursor[g]])
            cursor[g] += 1
        best = max(best, _backward(inst, order))
        count += 1
        if count > 200_000:
            raise SizeGuardError("too many distinct orders")
    return best


# -- exact policy evaluation ----------------------------------------------------


def _group_dists(pol: RandomizedPolicy, inst: Instance):
    """Per-group distribution when every group is homogeneous in ``inst``, else None."""
    if len(pol.roles) != inst.n:
        raise PolicyCoverageError(f"policy covers {len(pol.roles)} variables, instance has {inst.n}")
    out = []
    for members in pol.members:
        d = inst[members[0]]
        if any(inst[i] != d for i in members[1:]):
            return None
        out.append(d)
    return out


def _arrival_terms(pol: RandomizedPolicy, ctx, g: int, d: DiscreteDistribution) -> tuple[float, float]:
    """(P(stop), E[reward 1{stop}]) for one arrival from ``d``."""
    stop = reward = 0.0
    for x, p in zip(d.support, d.probs):
        a = pol.accept_probability(ctx, g, x)
        stop += p * a
        reward += p * a * x
    return stop, reward


def _report(inst: Instance, reward: float, visit: dict[int, float]) -> EvalReport:
    emax = exact_expected_max(inst)
    ratio = reward / emax if emax > 0 else 1.0
    return EvalReport(expected_reward=reward, visit_prob=visit, ratio=ratio)


def _eval_ps_multiset(pol, inst, dists) -> EvalReport:
    mult = pol.multiplicity
    reach = {tuple(mult): 1.0}
    visit_g = [0.0] * len(mult)
    reward = 0.0
    cache: dict = {}
    for S in all_states(mult):
        r = reach.get(S, 0.0)
        size = sum(S)
        if r == 0.0 or size == 0:
            continue
        for g in support_of(S):
            w = S[g] / size
            stop, rew = cache.setdefault((S, g), _arrival_terms(pol, S, g, dists[g]))
            visit_g[g] += r * w
            reward += r * w * rew
            child = without(S, g)
            reach[child] = reach.get(child, 0.0) + r * w * (1.0 - stop)
    visit = {i: visit_g[pol.roles[i]] / mult[pol.roles[i]] for i in range(inst.n)}
    return _report(inst, reward, visit)


def _eval_ps_subset(pol, inst) -> EvalReport:
    n = inst.n
    if n > MAX_SUBSET_N:
        raise SizeGuardError(f"subset evaluation limited to n <= {MAX_SUBSET_N}")
    ngroups = len(pol.supports)
    reach = [0.0] * (1 << n)
    full = (1 << n) - 1
    reach[full] = 1.0
    visit = [0.0] * n
    reward = 0.0
    for S in range(full, 0, -1):
        r = reach[S]
        if r == 0.0:
            continue
        members = [i for i in range(n) if S >> i & 1]
        counts = [0] * ngroups
        for i in members:
            counts[pol.roles[i]] += 1
        ctx = tuple(counts)
        w = 1.0 / len(members)
        for i in members:
            stop, rew = _arrival_terms(pol, ctx, pol.roles[i], inst[i])
            visit[i] += r * w
            reward += r * w * rew
            reach[S & ~(1 << i)] += r * w * (1.0 - stop)
    return _report(inst, reward, dict(enumerate(visit)))


def _eval_fixed(pol, inst) -> EvalReport:
    n = inst.n
    counts = list(pol.multiplicity)
    reach, reward = 1.0, 0.0
    visit = {}
    for i in range(n):
        g = pol.roles[i]
        ctx = tuple(counts)
        visit[i] = reach
        stop, rew = _arrival_terms(pol, ctx, g, inst[i])
        reward += reach * rew
        reach *= 1.0 - stop
        counts[g] -= 1
    return _report(inst, reward, visit)


def _assignments(pol: RandomizedPolicy, sigma, exhaustive: bool):
    """Concrete index orders realizing the group sequence ``sigma``."""
    if not exhaustive:
        cursor = [0] * len(pol.members)
        order = []
        for g in sigma:
            order.append(pol.members[g][cursor[g]])
            cursor[g] += 1
        yield tuple(order), 1.0
        return
    perms = [list(itertools.permutations(m)) for m in pol.members]
    weight = 1.0 / math.prod(len(p) for p in perms)
    for choice in itertools.product(*perms):
        cursor = [0] * len(pol.members)
        order = []
        for g in sigma:
            order.append(choice[g][cursor[g]])
            cursor[g] += 1
        yield tuple(order), weight


def _eval_fo(pol, inst, symmetric: bool) -> EvalReport:
    n = inst.n
    if not symmetric and n > MAX_ENUM_N + 2:
        raise SizeGuardError("free-order evaluation of heterogeneous groups limited to n <= 8")
    visit = [0.0] * n
    reward = 0.0
    for sigma, q in pol.order_dist.items():
        if q == 0.0:
            continue
        for order, w in _assignments(pol, sigma, exhaustive=not symmetric):
            reach = q * w
            for t, i in enumerate(order):
                g = sigma[t]
                visit[i] += reach
                stop, rew = _arrival_terms(pol, (t, sigma), g, inst[i])
                reward += reach * rew
                reach *= 1.0 - stop
    if symmetric:
        # within a group the concrete assignment is a uniformly random relabeling
        for members in pol.members:
            avg = sum(visit[i] for i in members) / len(members)
            for i in members:
                visit[i] = avg
    return _report(inst, reward, dict(enumerate(visit)))


def exact_policy_value(pol: RandomizedPolicy, inst: Instance, model: ModelKind) -> EvalReport:
    """Expected reward and per-variable visit probabilities, computed exactly."""
    dists = _group_dists(pol, inst)
    if model is ModelKind.FREE_ORDER:
        if pol.kind is not ModelKind.FREE_ORDER:
            raise PolicyCoverageError("free-order evaluation needs an order-indexed policy")
        return _eval_fo(pol, inst, symmetric=dists is not None)
    if pol.kind is not ModelKind.PROPHET_SECRETARY:
        raise PolicyCoverageError(f"{model.value} evaluation needs a state-indexed policy")
    if model is ModelKind.FIXED_ORDER:
        return _eval_fixed(pol, inst)
    if dists is not None:
        return _eval_ps_multiset(pol, inst, dists)
    return _eval_ps_subset(pol, inst)


# -- lemma checks ---------------------------------------------------------------


def enumerate_check_csz(dists: Sequence[DiscreteDistribution], thresholds: Sequence[float], k: int):
    """P(X_sigma(i) <= tau_i for i <= k) under a uniform sigma, vs prod G(tau_i)."""
    s = len(dists)
    if s > MAX_ENUM_N:
        raise SizeGuardError(f"permutation enumeration limited to s <= {MAX_ENUM_N}")
    if not 1 <= k <= s or len(thresholds) < k:
        raise ParameterError("need 1 <= k <= s thresholds")
    F = np.array([[cdf(d, t) for t in thresholds[:k]] for d in dists])
    total = 0.0
    perms = list(itertools.permutations(range(s)))
    for sigma in perms:
        total += math.prod(F[sigma[i], i] for i in range(k))
    lhs = total / len(perms)
    G = geometric_mean_cdf(list(dists), s)
    rhs = math.prod(cdf(G, t) for t in thresholds[:k])
    return lhs, rhs


def check_eps_small_ineq(dists: Sequence[DiscreteDistribution], tau: float, eps: float):
    """(1/s) sum E[X_i 1{X_i > tau}] vs (1-eps) E[Y 1{Y > tau}], Y ~ geometric mean."""
    G = geometric_mean_cdf(list(dists), len(dists))
    lhs = sum(expected_above(d, tau) for d in dists) / len(dists)
    rhs = (1.0 - eps) * expected_above(G, tau)
    return lhs, rhs


def geometric_mean_gap(x: Sequence[float], eps: float, n: int, c: float = 64.0):
    """(prod_{i<s} x_i)^(1/(s-1)) vs (1-eps)(prod x_i)^(1/s) - c eps / n^2."""
    x = np.asarray(x, dtype=float)
    s = x.size
    if s < 2:
        raise ParameterError("need at least two coordinates")
    with np.errstate(divide="ignore"):
        logs = np.log(x)
    lhs = float(np.exp(logs[:-1].sum() / (s - 1)))
    rhs = (1.0 - eps) * float(np.exp(logs.sum() / s)) - c * eps / n ** 2
    return lhs, rhs


def threshold_value(seq: Sequence[DiscreteDistribution], thresholds: Sequence[float]) -> float:
    """Reward of 'accept X_t iff X_t >= tau_t' along a fixed arrival sequence."""
    reach, total = 1.0, 0.0
    for d, tau in zip(seq, thresholds):
        total += reach * expected_above(d, tau, strict=False)
        reach *= float(cdf_left(d, tau))
    return total


def check_eq_iid(inst: Instance, s: int, thresholds: Sequence[float], sigma: Sequence[int], eps: float,
                 slack: float = 3.0):
    """Threshold algorithm on (I_rho, sigma) vs on (I', sigma), I' pooling the first s.

    Returns ``(lhs, rhs)`` with rhs already reduced by ``slack * eps * E[max]``.
    """
    n = inst.n
    if s > MAX_ENUM_N + 2:
        raise SizeGuardError("rho enumeration limited to s <= 8")
    dists = list(inst.dists)
    G = geometric_mean_cdf(dists[:s], s)
    perms = list(itertools.permutations(range(s)))
    lhs = 0.0
    for rho_head in perms:
        rho = list(rho_head) + list(range(s, n))
        lhs += threshold_value([dists[rho[sigma[t]]] for t in range(n)], thresholds)
    lhs /= len(perms)
    pooled = [G if sigma[t] < s else dists[sigma[t]] for t in range(n)]
    rhs = threshold_value(pooled, thresholds) - slack * eps * exact_expected_max(inst)
    return lhs, rhs


def _order_paths(pol: RandomizedPolicy, n: int):
    """(index order, probability, context per step) for every arrival path."""
    if pol.kind is ModelKind.PROPHET_SECRETARY:
        perms = list(itertools.permutations(range(n)))
        for order in perms:
            counts = list(pol.multiplicity)
            ctxs = []
            for i in order:
                ctxs.append(tuple(counts))
                counts[pol.roles[i]] -= 1
            yield order, 1.0 / len(perms), ctxs
    else:
        for sigma, q in pol.order_dist.items():
            for order, w in _assignments(pol, sigma, exhaustive=True):
                yield order, q * w, [(t, sigma) for t in range(n)]


def enumerate_check_payoff_lemma(inst: Instance, M_thresholds: Sequence[float], pol: RandomizedPolicy,
                                 alpha: float | None = None):
    """E[1_D ALG] vs (1-alpha) sum_i E[X_i 1{X_i > M_i}] P(A_i | B_i) by full enumeration.

    ``alpha`` defaults to 1 - prod F_i(M_i). The policy must accept every
    value above its variable's threshold.
    """
    n = inst.n
    if n > MAX_ENUM_N:
        raise SizeGuardError(f"outcome enumeration limited to n <= {MAX_ENUM_N}")
    M = [float(m) for m in M_thresholds]
    for i, d in enumerate(inst.dists):
        g = pol.roles[i]
        for x in d.support:
            forced = pol.tail is not None and x > pol.tail[g]
            if x > M[i] and not forced:
                raise PreconditionError(f"policy does not force acceptance of X_{i} = {x} > M_{i}")
    prod_cdf = math.prod(cdf(d, m) for d, m in zip(inst.dists, M))
    if alpha is None:
        alpha = 1.0 - prod_cdf
    elif prod_cdf < 1.0 - alpha - 1e-12:
        raise PreconditionError("prod F_i(M_i) < 1 - alpha")

    paths = list(_order_paths(pol, n))
    joint_AB = [0.0] * n
    prob_B = [0.0] * n
    lhs = 0.0
    for outcome in itertools.product(*(list(zip(d.support, d.probs)) for d in inst.dists)):
        xs = [v for v, _ in outcome]
        px = math.prod(p for _, p in outcome)
        if px == 0.0:
            continue
        above = [xs[i] > M[i] for i in range(n)]
        in_D = any(above)
        B = [all(not above[j] for j in range(n) if j != i) for i in range(n)]
        for i in range(n):
            if B[i]:
                prob_B[i] += px
        for order, q, ctxs in paths:
            reach = q
            for t, i in enumerate(order):
                if B[i]:
                    joint_AB[i] += px * reach
                a = pol.accept_probability(ctxs[t], pol.roles[i], xs[i])
                if in_D:
                    lhs += px * reach * a * xs[i]
                reach *= 1.0 - a
                if reach == 0.0:
                    break
    rhs = 0.0
    for i, d in enumerate(inst.dists):
        if prob_B[i] > 0:
            rhs += expected_above(d, M[i]) * joint_AB[i] / prob_B[i]
    return lhs, (1.0 - alpha) * rhs


def enumerate_check_close2(pol: RandomizedPolicy, F_list: Sequence[DiscreteDistribution],
                           Fp_list: Sequence[DiscreteDistribution], eps: float,
                           model: ModelKind = ModelKind.PROPHET_SECRETARY):
    """Value of the Bernoulli(1/(1+eps))-filtered policy on F vs (1-eps) x value on F'.

    The filter is applied analytically: running the wrapped policy on F has
    the same law as running the bare policy on F* with 1-F* = (1-F)/(1+eps).
    """
    if len(F_list) != len(Fp_list):
        raise ParameterError("F and F' lists differ in length")
    for F, Fp in zip(F_list, Fp_list):
        top = max(F.support[-1], Fp.support[-1])
        if not multiplicative_band_check(F, Fp, top, eps):
            raise PreconditionError("F and F' are not multiplicatively eps-close")
    p_keep = 1.0 / (1.0 + eps)
    star = Instance(tuple(filtered_distribution(F, p_keep) for F in F_list))
    prime = Instance(tuple(Fp_list))
    lhs = exact_policy_value(pol, star, model).expected_reward
    rhs = (1.0 - eps) * exact_policy_value(pol, prime, model).expected_reward
    return lhs, rhs
