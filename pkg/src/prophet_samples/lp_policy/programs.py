"""The four policy-synthesis programs and extraction of executable policies.

Variables, per state: ``a`` is the probability of reaching it, ``b`` the
probability of reaching it, seeing a given (variable, value) and stopping,
``g`` the same but continuing. ``delta`` lower-bounds both every visit
probability and the reward as a fraction of E[max].

PSLP and FOLP enumerate subsets / permutations of the n variables. The
reduced programs (rPSLP, rFOLP) collapse the i.i.d. prefix into one group
with multiplicity s and enumerate sub-multisets / multiset orderings.
"""
from __future__ import annotations

import itertools

from ..distributions import Instance, ModelKind, exact_expected_max
from ..errors import ParameterError, SizeGuardError, SolverError
from .policy import RandomizedPolicy, all_states, multiset_orderings, support_of
from .program import LinearProgram, LpSolution, LpStatus

MAX_PSLP_N = 10
MAX_FOLP_N = 7
MAX_GROUPS = 12
MAX_ORDERINGS = 100_000
REACH_TOL = 1e-9


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def build_pslp(inst: Instance) -> LinearProgram:
    n = inst.n
    if n > MAX_PSLP_N:
        raise SizeGuardError(f"PSLP enumerates 2^n states; n={n} exceeds {MAX_PSLP_N}")
    emax = exact_expected_max(inst)
    full = (1 << n) - 1
    lp = LinearProgram(kind="pslp", meta={"instance": inst})
    lp.maximize({("delta",): 1.0})
    for S in range(full + 1):
        lp.var(("a", S))
    for S in range(1, full + 1):
        for i in range(n):
            if S >> i & 1:
                for j in range(len(inst[i])):
                    lp.var(("b", i, j, S))
                    lp.var(("g", i, j, S))

    for i in range(n):
        terms = [(("a", S), -1.0 / _popcount(S)) for S in range(1, full + 1) if S >> i & 1]
        lp.add(f"visit_{i}", [(("delta",), 1.0)] + terms, "<=", 0.0)
    reward = [(("delta",), emax)]
    for S in range(1, full + 1):
        for i in range(n):
            if S >> i & 1:
                reward += [(("b", i, j, S), -x) for j, x in enumerate(inst[i].support)]
    lp.add("reward", reward, "<=", 0.0)
    lp.add("start", [(("a", full), 1.0)], "=", 1.0)
    for S in range(full):
        terms = [(("a", S), 1.0)]
        for i in range(n):
            if not S >> i & 1:
                terms += [(("g", i, j, S | 1 << i), -1.0) for j in range(len(inst[i]))]
        lp.add(f"flow_{S}", terms, "=", 0.0)
    for S in range(1, full + 1):
        size = _popcount(S)
        for i in range(n):
            if S >> i & 1:
                for j, p in enumerate(inst[i].probs):
                    lp.add(f"split_{i}_{j}_{S}",
                           [(("b", i, j, S), 1.0), (("g", i, j, S), 1.0), (("a", S), -p / size)], "=", 0.0)
    return lp


def _groups(inst: Instance):
    groups = inst.groups()
    if len(groups) > MAX_GROUPS:
        raise SizeGuardError(f"{len(groups)} distinct variables exceed the guard of {MAX_GROUPS}")
    dists = [inst[g[0]] for g in groups]
    mult = [len(g) for g in groups]
    return dists, mult


def build_rpslp(inst: Instance) -> LinearProgram:
    dists, mult = _groups(inst)
    emax = exact_expected_max(inst)
    states = all_states(mult)
    full = tuple(mult)
    lp = LinearProgram(kind="rpslp", meta={"instance": inst, "states": states})
    lp.maximize({("delta",): 1.0})
    for S in states:
        lp.var(("a", S))
    for S in states:
        for g in support_of(S):
            for j in range(len(dists[g])):
                lp.var(("b", g, j, S))
                lp.var(("g", g, j, S))

    for g, m in enumerate(mult):
        terms = [(("a", S), -S[g] / (sum(S) * m)) for S in states if S[g] > 0]
        lp.add(f"visit_{g}", [(("delta",), 1.0)] + terms, "<=", 0.0)
    reward = [(("delta",), emax)]
    for S in states:
        for g in support_of(S):
            reward += [(("b", g, j, S), -x) for j, x in enumerate(dists[g].support)]
    lp.add("reward", reward, "<=", 0.0)
    lp.add("start", [(("a", full), 1.0)], "=", 1.0)
    for S in states:
        if S == full:
            continue
        terms = [(("a", S), 1.0)]
        for g, m in enumerate(mult):
            if S[g] < m:
                parent = S[:g] + (S[g] + 1,) + S[g + 1:]
                terms += [(("g", g, j, parent), -1.0) for j in range(len(dists[g]))]
        lp.add(f"flow_{'.'.join(map(str, S))}", terms, "=", 0.0)
    for S in states:
        size = sum(S)
        for g in support_of(S):
            w = S[g] / size
            for j, p in enumerate(dists[g].probs):
                lp.add(f"split_{g}_{j}_{'.'.join(map(str, S))}",
                       [(("b", g, j, S), 1.0), (("g", g, j, S), 1.0), (("a", S), -w * p)], "=", 0.0)
    return lp


def _build_order_program(kind: str, inst: Instance, dists, mult, orders) -> LinearProgram:
    """Shared body of FOLP and rFOLP: ``orders`` are sequences of group ids."""
    n = inst.n
    emax = exact_expected_max(inst)
    lp = LinearProgram(kind=kind, meta={"instance": inst, "orders": orders})
    lp.maximize({("delta",): 1.0})
    for sigma in orders:
        for t in range(n):
            lp.var(("a", t, sigma))
        for t, g in enumerate(sigma):
            for j in range(len(dists[g])):
                lp.var(("b", t, j, sigma))
                lp.var(("g", t, j, sigma))

    for g, m in enumerate(mult):
        terms = [(("a", t, sigma), -1.0 / m) for sigma in orders for t in range(n) if sigma[t] == g]
        lp.add(f"visit_{g}", [(("delta",), 1.0)] + terms, "<=", 0.0)
    reward = [(("delta",), emax)]
    for sigma in orders:
        for t, g in enumerate(sigma):
            reward += [(("b", t, j, sigma), -x) for j, x in enumerate(dists[g].support)]
    lp.add("reward", reward, "<=", 0.0)
    lp.add("start", [(("a", 0, sigma), 1.0) for sigma in orders], "=", 1.0)
    for sigma in orders:
        tag = ".".join(map(str, sigma))
        for t in range(1, n):
            prev = sigma[t - 1]
            terms = [(("a", t, sigma), 1.0)] + [(("g", t - 1, j, sigma), -1.0) for j in range(len(dists[prev]))]
            lp.add(f"flow_{t}_{tag}", terms, "=", 0.0)
        for t, g in enumerate(sigma):
            for j, p in enumerate(dists[g].probs):
                lp.add(f"split_{t}_{j}_{tag}",
                       [(("b", t, j, sigma), 1.0), (("g", t, j, sigma), 1.0), (("a", t, sigma), -p)], "=", 0.0)
    return lp


def build_folp(inst: Instance) -> LinearProgram:
    n = inst.n
    if n > MAX_FOLP_N:
        raise SizeGuardError(f"FOLP enumerates n! orders; n={n} exceeds {MAX_FOLP_N}")
    orders = list(itertools.permutations(range(n)))
    return _build_order_program("folp", inst, list(inst.dists), [1] * n, orders)


def build_rfolp(inst: Instance) -> LinearProgram:
    dists, mult = _groups(inst)
    orders = []
    for sigma in multiset_orderings(mult):
        orders.append(sigma)
        if len(orders) > MAX_ORDERINGS:
            raise SizeGuardError(f"more than {MAX_ORDERINGS} orderings of the multiset")
    return _build_order_program("rfolp", inst, dists, mult, orders)


def _ratio(sol: LpSolution, b_key, g_key, expected: float, tol: float) -> float:
    beta, gamma = sol.value(b_key), sol.value(g_key)
    if abs(beta + gamma - expected) > max(tol, 1e-6 * expected):
        raise SolverError(f"beta + gamma = {beta + gamma} but reach weight is {expected} at {b_key}")
    if expected <= REACH_TOL:
        return 1.0  # unreachable: accepting is harmless
    return min(1.0, max(0.0, beta / (beta + gamma))) if beta + gamma > 0 else 1.0


def extract_policy(sol: LpSolution, lp_kind: str | None = None, inst: Instance | None = None,
                   tol: float = 1e-7) -> RandomizedPolicy:
    """Turn an optimal solution into a policy that reproduces its a, b, g."""
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverError(f"cannot extract a policy from a {sol.status.value} solution")
    lp = sol.program
    kind = lp_kind or lp.kind
    if kind != lp.kind:
        raise ParameterError(f"solution belongs to a {lp.kind} program, not {kind}")
    inst = inst or lp.meta["instance"]
    n = inst.n

    if kind == "pslp":
        roles = tuple(range(n))
        supports = tuple(d.support for d in inst.dists)
        table = {}
        for S in range(1, 1 << n):
            state = tuple(S >> i & 1 for i in range(n))
            size = sum(state)
            a = sol.value(("a", S))
            for i in range(n):
                if state[i]:
                    for j, p in enumerate(inst[i].probs):
                        table[(state, i, j)] = _ratio(sol, ("b", i, j, S), ("g", i, j, S), a * p / size, tol)
        return RandomizedPolicy(ModelKind.PROPHET_SECRETARY, roles, supports, table)

    if kind == "rpslp":
        dists, mult = _groups(inst)
        table = {}
        for S in lp.meta["states"]:
            size = sum(S)
            if size == 0:
                continue
            a = sol.value(("a", S))
            for g in support_of(S):
                for j, p in enumerate(dists[g].probs):
                    table[(S, g, j)] = _ratio(sol, ("b", g, j, S), ("g", g, j, S), a * S[g] / size * p, tol)
        return RandomizedPolicy(ModelKind.PROPHET_SECRETARY, inst.roles(), tuple(d.support for d in dists), table)

    if kind in ("folp", "rfolp"):
        if kind == "folp":
            dists, roles = list(inst.dists), tuple(range(n))
        else:
            dists, _ = _groups(inst)
            roles = inst.roles()
        table, order_dist = {}, {}
        for sigma in lp.meta["orders"]:
            first = sol.value(("a", 0, sigma))
            if first > 0.0:
                order_dist[sigma] = first
            for t, g in enumerate(sigma):
                a = sol.value(("a", t, sigma))
                for j, p in enumerate(dists[g].probs):
                    table[(t, j, sigma)] = _ratio(sol, ("b", t, j, sigma), ("g", t, j, sigma), a * p, tol)
        total = sum(order_dist.values())
        order_dist = {k: v / total for k, v in order_dist.items()}
        return RandomizedPolicy(ModelKind.FREE_ORDER, roles, tuple(d.support for d in dists), table,
                                order_dist=order_dist)

    raise ParameterError(f"unknown program kind {kind!r}")


def build_program(inst: Instance, model: ModelKind, reduced: bool = True) -> LinearProgram:
    if model is ModelKind.FREE_ORDER:
        return build_rfolp(inst) if reduced else build_folp(inst)
    if model is ModelKind.PROPHET_SECRETARY:
        return build_rpslp(inst) if reduced else build_pslp(inst)
    raise ParameterError("fixed-order instances have no synthesis program")


def count_states(lp: LinearProgram) -> int:
    if "states" in lp.meta:
        return len(lp.meta["states"])
    if "orders" in lp.meta:
        return len(lp.meta["orders"])
    return sum(1 for k in lp.keys if k[0] == "a")


