"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Slow (dense, O(m n) per pivot) but dependency-free and exact enough for the
small programs used to cross-check the sparse solver.
"""
from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-11
MAX_COLS = 4000


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], allowed: int) -> str:
    """Pivot until optimal; the objective row is the last row of T."""
    while True:
        costs = T[-1, :allowed]
        entering = np.flatnonzero(costs < -PIVOT_TOL)
        if entering.size == 0:
            return "optimal"
        col = int(entering[0])
        column = T[:-1, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + PIVOT_TOL]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)


def solve_dense(c, A_ub, b_ub, A_eq, b_eq):
    """Maximize c x s.t. A_ub x <= b_ub, A_eq x = b_eq, 0 <= x <= 1.

    Returns ``(status, x)`` with status in {"optimal", "infeasible", "unbounded"}.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if n > MAX_COLS:
        raise ValueError(f"dense simplex limited to {MAX_COLS} variables, got {n}")
    A_ub = np.vstack([np.asarray(A_ub, dtype=float).reshape(-1, n), np.eye(n)])
    b_ub = np.concatenate([np.asarray(b_ub, dtype=float).ravel(), np.ones(n)])
    A_eq = np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.asarray(b_eq, dtype=float).ravel()

    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    # columns: x | slacks (one per <= row) | artificials (one per row needing one)
    needs_art = [b < 0 for b in b_ub] + [True] * m_eq
    n_art = sum(needs_art)
    width = n + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    basis: list[int] = []
    art = n + m_ub
    for r in range(m_ub):
        sign = -1.0 if b_ub[r] < 0 else 1.0
        T[r, :n] = sign * A_ub[r]
        T[r, n + r] = sign
        T[r, -1] = sign * b_ub[r]
        if needs_art[r]:
            T[r, art] = 1.0
            basis.append(art)
            art += 1
        else:
            basis.append(n + r)
    for e in range(m_eq):
        r = m_ub + e
        sign = -1.0 if b_eq[e] < 0 else 1.0
        T[r, :n] = sign * A_eq[e]
        T[r, -1] = sign * b_eq[e]
        T[r, art] = 1.0
        basis.append(art)
        art += 1

    first_art = n + m_ub
    if n_art:
        # phase 1: maximize -sum(artificials); reduced costs = c_B B^-1 A - c
        cost = np.zeros(width)
        cost[first_art:] = -1.0
        T[-1, :width] = -cost
        for r, b in enumerate(basis):
            if cost[b] != 0.0:
                T[-1] += cost[b] * T[r]
        _run(T, basis, width)
        if T[-1, -1] < -1e-8:
            return "infeasible", None
        # drive remaining artificials out of the basis
        keep = []
        for r in range(m):
            if basis[r] >= first_art:
                cols = np.flatnonzero(np.abs(T[r, :first_art]) > 1e-9)
                if cols.size:
                    _pivot(T, basis, r, int(cols[0]))
                    keep.append(r)
            else:
                keep.append(r)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[r] for r in keep]
        T = np.hstack([T[:, :first_art], T[:, -1:]])

    # phase 2
    width = first_art
    cost = np.zeros(width)
    cost[:n] = c
    T[-1, :] = 0.0
    T[-1, :width] = -cost
    for r, b in enumerate(basis):
        if cost[b] != 0.0:
            T[-1] += cost[b] * T[r]
    status = _run(T, basis, width)
    if status != "optimal":
        return status, None
    x = np.zeros(width)
    for r, b in enumerate(basis):
        x[b] = T[r, -1]
    return "optimal", x[:n]
