"""Sparse linear programs over [0, 1]-bounded variables, and their solutions.

All programs maximize. Variables are addressed by hashable keys such as
``("a", state)`` or ``("b", t, j, sigma)``; the first component is a tag.
"""
from __future__ import annotations

import enum
import re
import time
from dataclasses import dataclass, field
from typing import Hashable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from ..errors import SolverError

FEAS_TOL = 1e-7
OBJ_TOL = 1e-6


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class Constraint:
    name: str
    cols: list[int]
    vals: list[float]
    sense: str  # "<=" or "="
    rhs: float


@dataclass
class LinearProgram:
    kind: str = "custom"
    keys: list[Hashable] = field(default_factory=list)
    index: dict[Hashable, int] = field(default_factory=dict)
    objective: dict[int, float] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def var(self, key: Hashable) -> int:
        col = self.index.get(key)
        if col is None:
            col = len(self.keys)
            self.keys.append(key)
            self.index[key] = col
        return col

    def maximize(self, terms: dict[Hashable, float]) -> None:
        self.objective = {self.var(k): float(c) for k, c in terms.items()}

    def add(self, name: str, terms, sense: str, rhs: float) -> None:
        """``terms`` is an iterable of (key, coefficient) pairs."""
        if sense not in ("<=", "="):
            raise ValueError(f"unsupported relation {sense!r}")
        cols, vals = [], []
        for key, coef in terms:
            col = self.index[key]
            cols.append(col)
            vals.append(float(coef))
        self.constraints.append(Constraint(name, cols, vals, sense, float(rhs)))

    @property
    def num_vars(self) -> int:
        return len(self.keys)

    def matrices(self):
        """(c, A_ub, b_ub, A_eq, b_eq) with duplicate entries summed."""
        c = np.zeros(self.num_vars)
        for col, coef in self.objective.items():
            c[col] = coef
        blocks = {"<=": ([], [], [], []), "=": ([], [], [], [])}
        for con in self.constraints:
            rows, cols, vals, rhs = blocks[con.sense]
            r = len(rhs)
            rows.extend([r] * len(con.cols))
            cols.extend(con.cols)
            vals.extend(con.vals)
            rhs.append(con.rhs)
        out = [c]
        for sense in ("<=", "="):
            rows, cols, vals, rhs = blocks[sense]
            mat = sp.csr_matrix((vals, (rows, cols)), shape=(len(rhs), self.num_vars))
            out += [mat, np.asarray(rhs, dtype=float)]
        return tuple(out)

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation of ``x``."""
        _, A_ub, b_ub, A_eq, b_eq = self.matrices()
        worst = max(0.0, float(np.max(-x, initial=0.0)), float(np.max(x - 1.0, initial=0.0)))
        if A_ub.shape[0]:
            worst = max(worst, float(np.max(A_ub @ x - b_ub)))
        if A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(A_eq @ x - b_eq))))
        return worst


@dataclass
class LpSolution:
    status: LpStatus
    program: LinearProgram
    x: np.ndarray | None
    objective_value: float
    solve_ms: float = 0.0

    def value(self, key: Hashable) -> float:
        return float(self.x[self.program.index[key]])

    @property
    def delta(self) -> float:
        return self.value(("delta",))

    def _by_tag(self, tag: str) -> dict:
        return {k[1:]: float(self.x[i]) for i, k in enumerate(self.program.keys) if k[0] == tag}

    @property
    def alpha(self) -> dict:
        return self._by_tag("a")

    @property
    def beta(self) -> dict:
        return self._by_tag("b")

    @property
    def gamma(self) -> dict:
        return self._by_tag("g")


def solve_lp(lp: LinearProgram, tol: float = FEAS_TOL, backend: str = "highs") -> LpSolution:
    """Maximize ``lp``; every variable is bounded to [0, 1].

    ``backend`` is ``"highs"`` (HiGHS interior point with crossover, sparse) or
    ``"simplex"`` (the dense Bland's-rule tableau in :mod:`.simplex`, for
    small programs). Optimal solutions are checked against the program
    within ``tol``.
    """
    start = time.perf_counter()
    c, A_ub, b_ub, A_eq, b_eq = lp.matrices()
    if backend == "highs":
        res = linprog(
            -c,
            A_ub=A_ub if A_ub.shape[0] else None,
            b_ub=b_ub if A_ub.shape[0] else None,
            A_eq=A_eq if A_eq.shape[0] else None,
            b_eq=b_eq if A_eq.shape[0] else None,
            bounds=(0.0, 1.0),
            method="highs-ipm",
            options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        )
        status = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}.get(res.status)
        if status is None:
            raise SolverError(f"HiGHS failed: {res.message}")
        x = res.x if status is LpStatus.OPTIMAL else None
    elif backend == "simplex":
        from .simplex import solve_dense

        status_name, x = solve_dense(c, A_ub.toarray(), b_ub, A_eq.toarray(), b_eq)
        status = LpStatus(status_name)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    elapsed = 1000.0 * (time.perf_counter() - start)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, lp, None, float("nan"), elapsed)
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    worst = lp.violation(x)
    if worst > tol:
        raise SolverError(f"solution violates the program by {worst:.3g} (> {tol})")
    return LpSolution(status, lp, x, float(c @ x), elapsed)


# -- text dump ------------------------------------------------------------------
#
# maximize
#  obj: <coef> <var> + <coef> <var> ...
# subject to
#  <name>: <coef> <var> + ... <= | = <rhs>
# bounds
#  0 <= <var> <= 1
# end
#
# This is the subset of the CPLEX LP format that HiGHS, GLPK and CBC read.


def var_name(key: Hashable) -> str:
    parts = []
    for comp in key[1:]:
        if isinstance(comp, tuple):
            parts.append(".".join(str(c) for c in comp) or "e")
        else:
            parts.append(str(comp))
    return "_".join([key[0], *parts])


def _terms(cols, vals, names) -> str:
    out = []
    for col, coef in zip(cols, vals):
        sign = "-" if coef < 0 else "+"
        out.append(f"{sign} {abs(coef)!r} {names[col]}")
    text = " ".join(out) if out else "+ 0 " + names[0]
    return text[2:] if text.startswith("+ ") else text


def dump_lp(lp: LinearProgram) -> str:
    names = [var_name(k) for k in lp.keys]
    obj_cols = sorted(lp.objective)
    lines = ["maximize", " obj: " + _terms(obj_cols, [lp.objective[c] for c in obj_cols], names), "subject to"]
    for con in lp.constraints:
        lines.append(f" {con.name}: {_terms(con.cols, con.vals, names)} {con.sense} {con.rhs!r}")
    lines.append("bounds")
    lines += [f" 0 <= {nm} <= 1" for nm in names]
    lines.append("end")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-])?\s*([0-9.eE+-]+)\s+([A-Za-z][\w.]*)")


def load_lp(text: str) -> LinearProgram:
    """Parse the output of :func:`dump_lp`; variable keys become ``(name,)``."""
    lp = LinearProgram(kind="loaded")
    section = None

    def parse_terms(expr: str):
        terms = []
        for sign, coef, name in _TERM.findall(expr):
            lp.var((name,))
            terms.append(((name,), (-1.0 if sign == "-" else 1.0) * float(coef)))
        return terms

    for raw in text.splitlines():
        line = raw.strip()
        if line in ("maximize", "subject to", "bounds", "end"):
            section = line
            continue
        if not line:
            continue
        if section == "maximize":
            lp.maximize(dict(parse_terms(line.split(":", 1)[1])))
        elif section == "subject to":
            name, body = line.split(":", 1)
            sense = "<=" if "<=" in body else "="
            expr, rhs = body.rsplit(sense, 1)
            lp.add(name.strip(), parse_terms(expr), sense, float(rhs))
        elif section == "bounds":
            lp.var((line.split("<=")[1].strip(),))
    return lp
