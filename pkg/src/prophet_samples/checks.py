"""Named property suites: exact lemma checks, estimator statistics, LP agreement.

Each suite returns one :class:`CheckRow` per case. A row passes when
``lhs >= rhs - tol``; for statistical rows ``lhs`` is an observed frequency
and ``rhs`` the required one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    DiscreteDistribution,
    Instance,
    ModelKind,
    exact_expected_max,
    max_cdf,
    max_distribution,
    merged_support,
)
from .errors import ParameterError
from .estimation import (
    EmpiricalCDF,
    classify_large,
    dkw_radius,
    estimate_T,
    sample_budget,
    sup_distance,
    true_L_star,
    true_T_star,
)
from .generators import eps_small_random, random_discrete
from .lp_policy import (
    attach_tail_rule,
    build_program,
    extract_policy,
    solve_lp,
    uniform_policy,
)
from .oracle import (
    check_eps_small_ineq,
    check_eq_iid,
    enumerate_check_close2,
    enumerate_check_csz,
    enumerate_check_payoff_lemma,
    exact_policy_value,
    geometric_mean_gap,
    optimal_fo_value,
    optimal_ps_value,
)

PS, FO = ModelKind.PROPHET_SECRETARY, ModelKind.FREE_ORDER


@dataclass(frozen=True)
class CheckRow:
    suite: str
    case: str
    lhs: float
    rhs: float
    tol: float

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return bool(self.lhs >= self.rhs - self.tol)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.suite},{self.case},{self.lhs:.6f},{self.rhs:.6f},{self.margin:.6f},{status}"


ROW_HEADER = "suite,case,lhs,rhs,margin,status"


def _rand_dist(rng, max_support=3, zero=False, top=9) -> DiscreteDistribution:
    m = int(rng.integers(1, max_support + 1))
    vals = rng.choice(np.arange(1 if zero else 0, top + 1), size=m - 1 if zero else m, replace=False)
    vals = sorted(([0] if zero else []) + vals.tolist())
    w = rng.integers(1, 10, size=len(vals)).astype(float)
    return DiscreteDistribution(tuple(float(v) for v in vals), tuple(w / w.sum()))


# -- exact lemma suites ---------------------------------------------------------


def suite_csz(cases: int = 120, seed: int = 0) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        s = int(rng.integers(2, 7))
        if c % 10 == 0:
            dists = [_rand_dist(rng)] * s
        else:
            dists = [_rand_dist(rng) for _ in range(s)]
        grid = merged_support(dists)
        pts = np.concatenate([grid, grid + 0.5, [-1.0]])
        k = int(rng.integers(1, s + 1))
        taus = rng.choice(pts, size=k).tolist()
        lhs, rhs = enumerate_check_csz(dists, taus, k)
        rows.append(CheckRow("csz", f"s={s},k={k},#{c}", lhs, rhs, 1e-12))
    return rows


def suite_eps_small(cases: int = 200, seed: int = 0) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        eps = float(rng.choice([0.05, 0.1, 0.2, 0.3, 0.5]))
        s = int(rng.integers(1, 7))
        inst = eps_small_random(s, s, eps, seed=int(rng.integers(1 << 31)))
        grid = merged_support(inst)
        tau = float(rng.choice(np.concatenate([grid, grid + 0.5])))
        lhs, rhs = check_eps_small_ineq(inst.dists, tau, eps)
        rows.append(CheckRow("eps_small", f"s={s},eps={eps},tau={tau},#{c}", lhs, rhs, 1e-10))
    return rows


def suite_geom_mean(vectors: int = 10_000, seed: int = 0, c: float = 64.0) -> list[CheckRow]:
    """Random vectors in [0,1]^s for n >= 1/eps^2 and n/2 <= s <= n; one row per (eps, n)."""
    rng = np.random.default_rng(seed)
    rows = []
    settings = [(0.1, 100), (0.2, 25), (0.2, 40), (0.3, 12), (0.5, 4)]
    per = max(1, vectors // len(settings))
    for eps, n in settings:
        worst = math.inf
        for _ in range(per):
            s = int(rng.integers(max(2, math.ceil(n / 2)), n + 1))
            spread = rng.uniform(0.0, 1.0)
            x = 1.0 - spread * rng.random(s)
            if rng.random() < 0.2:
                x[rng.integers(s)] = 0.0
            lhs, rhs = geometric_mean_gap(x, eps, n, c)
            worst = min(worst, lhs - rhs)
        rows.append(CheckRow("geom_mean", f"eps={eps},n={n},vectors={per}", worst, 0.0, 0.0))
    return rows


def _threshold_rule(taus):
    """Accept iff value >= the threshold of the current context."""
    return lambda ctx, g, v: 1.0 if v >= taus[(ctx, g)] else 0.0


class _RandomThresholds(dict):
    def __init__(self, rng, values):
        super().__init__()
        self._rng, self._values = rng, values

    def __missing__(self, key):
        self[key] = float(self._rng.choice(self._values))
        return self[key]


def suite_payoff(cases: int = 60, seed: int = 0) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        n = int(rng.integers(1, 4)) if c % 4 else 4
        inst = Instance(tuple(_rand_dist(rng) for _ in range(n)))
        M = [float(rng.choice(d.support)) for d in inst.dists]
        roles = tuple(range(n))
        kind = FO if c % 3 == 2 else PS
        if c % 2:
            pol = uniform_policy(inst, kind=kind, roles=roles,
                                 rule=lambda ctx, g, v, r=rng: float(r.random()))
        else:
            pol = uniform_policy(inst, kind=kind, roles=roles,
                                 rule=_threshold_rule(_RandomThresholds(rng, np.arange(0, 10))))
        pol = attach_tail_rule(pol, dict(enumerate(M)))
        lhs, rhs = enumerate_check_payoff_lemma(inst, M, pol)
        rows.append(CheckRow("payoff", f"n={n},{kind.value},#{c}", lhs, rhs, 1e-10))
    return rows


def band_pair(rng, eps: float, max_support: int = 3) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """(F, F') on a common support containing 0 with 1-F within [1-eps, 1+eps] (1-F')."""
    Fp = _rand_dist(rng, max_support, zero=True)
    tails_p = 1.0 - np.asarray(Fp.cumulative)[:-1]
    tails = []
    prev = 1.0
    for t in tails_p:
        val = min(prev, t * rng.uniform(1.0 - eps, 1.0 + eps))
        tails.append(val)
        prev = val
    cum = np.concatenate([1.0 - np.asarray(tails), [1.0]])
    probs = np.diff(np.concatenate([[0.0], cum]))
    probs = np.clip(probs, 0.0, None)
    F = DiscreteDistribution(Fp.support, tuple(probs / probs.sum()))
    return F, Fp


def suite_close2(cases: int = 60, seed: int = 0, proof_factor: bool = True) -> list[CheckRow]:
    """Adaptive threshold policies (monotone in the value) built for F', run on F."""
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        eps = float(rng.choice([0.0, 0.05, 0.1, 0.2, 0.4]))
        n = int(rng.integers(1, 4))
        pairs = [band_pair(rng, eps) for _ in range(n)]
        F_list = [p[0] for p in pairs]
        Fp_list = [p[1] for p in pairs]
        model = FO if c % 3 == 2 else PS
        prime = Instance(tuple(Fp_list))
        taus = _RandomThresholds(rng, np.arange(0, 10))
        pol = uniform_policy(prime, kind=model, roles=tuple(range(n)), rule=_threshold_rule(taus))
        lhs, rhs = enumerate_check_close2(pol, F_list, Fp_list, eps, model)
        tag = f"n={n},eps={eps},{model.value},#{c}"
        rows.append(CheckRow("close2", tag, lhs, rhs, 1e-12))
        if proof_factor:
            # the coupling argument only yields (1-eps)/(1+eps), see close2_counterexample
            rows.append(CheckRow("close2", tag + ",factor=(1-eps)/(1+eps)", lhs, rhs / (1.0 + eps), 1e-12))
    return rows


def close2_counterexample(eps: float = 0.2) -> tuple[float, float]:
    """F' = point mass at 1, F = 1 w.p. 1-eps: the filtered rule gets (1-eps)/(1+eps) < 1-eps."""
    Fp = DiscreteDistribution((0.0, 1.0), (0.0, 1.0))
    F = DiscreteDistribution((0.0, 1.0), (eps, 1.0 - eps))
    pol = uniform_policy(Instance((Fp,)), rule=lambda ctx, g, v: 1.0 if v >= 1.0 else 0.0)
    return enumerate_check_close2(pol, [F], [Fp], eps)


def suite_eq_iid(cases: int = 60, seed: int = 0, n: int = 6, eps: float = 0.5, slack: float = 3.0) -> list[CheckRow]:
    if eps <= 1.0 / math.sqrt(n):
        raise ParameterError("the pooled comparison needs eps > 1/sqrt(n)")
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        s = int(rng.integers(math.ceil(n / 2), n + 1))
        inst = eps_small_random(n, s, eps, seed=int(rng.integers(1 << 31)))
        grid = np.concatenate([[0.0], merged_support(inst)])
        taus = rng.choice(grid, size=n).tolist()
        sigma = [int(i) for i in rng.permutation(n)]
        lhs, rhs = check_eq_iid(inst, s, taus, sigma, eps, slack)
        rows.append(CheckRow("eq_iid", f"s={s},#{c}", lhs, rhs, 1e-12))
    return rows


# -- statistical suites ---------------------------------------------------------


def estimation_instance() -> Instance:
    """Eight rarely-positive variables and two dense ones, all on fine grids."""
    small = DiscreteDistribution(
        (0.0,) + tuple(float(v) for v in np.linspace(1.0, 100.0, 40)), (0.9,) + (0.1 / 40,) * 40)
    dense = DiscreteDistribution(tuple(float(v) for v in np.linspace(0.0, 50.0, 50)), (1.0 / 50,) * 50)
    return Instance((small,) * 8 + (dense, dense), 8)


def _lowertail_rows(seed: int, eps: float = 0.2, cases: int = 40) -> list[CheckRow]:
    """(1-eps) E[max] <= E[max 1{max > T}] at the largest support point with H(T) <= eps."""
    rng = np.random.default_rng(seed)
    rows = []
    for c in range(cases):
        n = int(rng.integers(1, 6))
        inst = Instance(tuple(_rand_dist(rng) for _ in range(n)))
        grid = merged_support(inst)
        H = max_cdf(inst, grid)
        below = np.flatnonzero(H <= eps)
        if below.size == 0:
            continue
        T = float(grid[below[-1]])
        mx = max_distribution(inst)
        upper = sum(v * p for v, p in zip(mx.support, mx.probs) if v > T)
        rows.append(CheckRow("estimation", f"lowertail#{c}", upper, (1 - eps) * exact_expected_max(inst), 1e-12))
    return rows


def suite_estimation(trials: int = 500, eps: float = 0.2, seed: int = 0) -> list[CheckRow]:
    inst = estimation_instance()
    budget = sample_budget(eps)
    k1, k2 = budget.k1, budget.k2
    T_star = true_T_star(inst, eps)
    L_star = true_L_star(inst, T_star, eps)
    rng = np.random.default_rng(seed)
    band_hits = cover_hits = 0
    lo, hi = (1 - eps) ** 2 * eps, eps
    for _ in range(trials):
        rows1 = np.column_stack([_draw(d, rng, k1) for d in inst.dists])
        T = estimate_T(rows1.max(axis=1), eps)
        H = float(max_cdf(inst, [T])[0])
        band_hits += lo <= H <= hi
        rows2 = np.column_stack([_draw(d, rng, k2) for d in inst.dists])
        L = classify_large([EmpiricalCDF(rows2[:, i]) for i in range(inst.n)], T, eps)
        cover_hits += L_star <= L
    need = 1 - 2 * eps
    out = [
        CheckRow("estimation", f"T_band(k1={k1},trials={trials})", band_hits / trials, need, 0.0),
        CheckRow("estimation", f"L_covers_Lstar(|L*|={len(L_star)},trials={trials})", cover_hits / trials, need, 0.0),
    ]
    return out + _lowertail_rows(seed)


def _draw(d: DiscreteDistribution, rng, k: int) -> np.ndarray:
    idx = np.searchsorted(d.cumulative, rng.random(k), side="right")
    return np.asarray(d.support)[np.minimum(idx, len(d) - 1)]


def suite_dkw(trials: int = 1000, k: int = 10_000, seed: int = 0) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    d = DiscreteDistribution(tuple(float(v) for v in range(200)), tuple(np.full(200, 1 / 200)))
    r = dkw_radius(k)
    hits = sum(sup_distance(d, EmpiricalCDF(_draw(d, rng, k))) <= r for _ in range(trials))
    return [CheckRow("dkw", f"k={k},radius={r:.6f},trials={trials}", hits / trials, 0.995, 0.0)]


@dataclass(frozen=True)
class LpCase:
    inst: Instance
    delta: dict  # (model, reduced) -> delta
    policy_gap: float  # worst of delta E[max] - reward, delta - min visit (should be <= 0)
    optimal: dict  # model -> optimal value


def lp_reduction_cases(cases: int = 50, seed: int = 0) -> list[LpCase]:
    rng = np.random.default_rng(seed)
    out = []
    for c in range(cases):
        n = int(rng.integers(2, 7))
        s = int(rng.integers(max(n - 2, 0), n + 1))
        inst = random_discrete(n, s, seed=int(rng.integers(1 << 31)))
        emax = exact_expected_max(inst)
        deltas, gap = {}, -math.inf
        for model in (PS, FO):
            for reduced in (True, False):
                sol = solve_lp(build_program(inst, model, reduced))
                deltas[(model, reduced)] = sol.delta
                rep = exact_policy_value(extract_policy(sol), inst, model)
                gap = max(gap, sol.delta * emax - rep.expected_reward, sol.delta - rep.min_visit)
        out.append(LpCase(inst, deltas, gap, {PS: optimal_ps_value(inst), FO: optimal_fo_value(inst)}))
    return out


def suite_lp_reduction(cases: int = 50, seed: int = 0) -> list[CheckRow]:
    rows = []
    for c, case in enumerate(lp_reduction_cases(cases, seed)):
        for model in (PS, FO):
            diff = abs(case.delta[(model, True)] - case.delta[(model, False)])
            rows.append(CheckRow("lp_reduction", f"n={case.inst.n},s={case.inst.num_iid_prefix},{model.value},#{c}",
                                 -diff, 0.0, 1e-6))
    return rows


SUITES = {
    "csz": suite_csz,
    "eps_small": suite_eps_small,
    "geom_mean": suite_geom_mean,
    "payoff": suite_payoff,
    "close2": suite_close2,
    "eq_iid": suite_eq_iid,
    "estimation": suite_estimation,
    "dkw": suite_dkw,
    "lp_reduction": suite_lp_reduction,
}


def run_suite(name: str, seed: int = 0) -> list[CheckRow]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ParameterError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn(seed=seed)
