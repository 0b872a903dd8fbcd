"""Sample-driven estimators: lower cutoff, large-variable set, tail quantiles.

A :class:`SampleMatrix` is consumed in fixed row blocks, one per stage, in
the order T, L, M, G-hat, large-variable distributions, M_i. Each stage
therefore sees fresh samples, and a run is reproducible from one matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import DiscreteDistribution, Instance, merged_support, cdf_values, sample_instance
from .errors import BudgetError, InstanceFormatError, ParameterError

# floor(k * q) with q computed in floating point: 100 * 0.29 = 28.999999999999996
_RANK_SLACK = 1e-9


def _rank(k: int, fraction: float) -> int:
    return math.floor(k * fraction + _RANK_SLACK)


@dataclass(frozen=True)
class SampleBudget:
    k1: int
    k2: int
    kM: int
    kG: int
    kL: int
    kMi: int

    STAGES = ("k1", "k2", "kM", "kG", "kL", "kMi")

    @property
    def total(self) -> int:
        return sum(getattr(self, s) for s in self.STAGES)

    def blocks(self) -> dict[str, slice]:
        """Row slice of each stage, in consumption order."""
        out, start = {}, 0
        for s in self.STAGES:
            stop = start + getattr(self, s)
            out[s] = slice(start, stop)
            start = stop
        return out


def sample_budget(eps: float) -> SampleBudget:
    if not 0.0 < eps < 0.5:
        raise ParameterError(f"eps={eps} outside (0, 1/2)")
    k1 = math.ceil(6.0 * eps ** -3 * math.log(1.0 / eps))
    k4 = math.ceil(eps ** -4 - 1e-9)
    k5 = math.ceil(eps ** -5 - 1e-9)
    return SampleBudget(k1=k1, k2=k1, kM=k4, kG=k5, kL=k5, kMi=k5)


@dataclass(frozen=True)
class SampleMatrix:
    """k rows of joint samples; column i holds i.i.d. draws of X_i."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise ParameterError(f"sample matrix must be a non-empty 2-d grid, got shape {v.shape}")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ParameterError("samples must be finite and non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def draw(cls, inst: Instance, rows: int, rng: np.random.Generator) -> "SampleMatrix":
        return cls(sample_instance(inst, rng, rows))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def block(self, rows: slice) -> np.ndarray:
        return self.values[rows]


def format_samples(samples: SampleMatrix) -> str:
    lines = [f"{samples.k} {samples.n}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in samples.values]
    return "\n".join(lines) + "\n"


def parse_samples(text: str) -> SampleMatrix:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        k, n = (int(t) for t in lines[0])
        rows = [[float(t) for t in ln] for ln in lines[1:]]
    except (ValueError, IndexError):
        raise InstanceFormatError("malformed sample file") from None
    if len(rows) != k or any(len(r) != n for r in rows):
        raise InstanceFormatError(f"expected {k} rows of {n} samples")
    try:
        return SampleMatrix(np.array(rows, dtype=float))
    except ParameterError as exc:
        raise InstanceFormatError(str(exc)) from None


def read_samples(path) -> SampleMatrix:
    return parse_samples(Path(path).read_text())


def write_samples(samples: SampleMatrix, path) -> None:
    Path(path).write_text(format_samples(samples))


@dataclass(frozen=True)
class EmpiricalCDF:
    values: np.ndarray  # sorted samples

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float), kind="stable")
        if v.size == 0:
            raise ParameterError("empirical CDF needs at least one sample")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.size

    def __call__(self, x) -> np.ndarray | float:
        out = np.searchsorted(self.values, x, side="right") / self.k
        return float(out) if np.ndim(out) == 0 else out

    def to_distribution(self) -> DiscreteDistribution:
        support, counts = np.unique(self.values, return_counts=True)
        return DiscreteDistribution.from_cdf(support, np.cumsum(counts) / self.k)


def order_statistic(samples: Sequence[float], rank: int) -> float:
    """The ``rank``-th smallest sample, 1-indexed."""
    return float(np.sort(np.asarray(samples, dtype=float), kind="stable")[rank - 1])


def estimate_T(max_samples: Sequence[float], eps: float) -> float:
    """The floor(k1 eps (1-eps))-th smallest sample of the maximum."""
    k1 = len(max_samples)
    r = _rank(k1, eps * (1.0 - eps))
    if r < 1:
        raise BudgetError(f"k1={k1} too small for eps={eps}: rank underflows to 0")
    return order_statistic(max_samples, r)


def tie_adjusted_T(max_samples: Sequence[float], eps: float) -> float:
    """``estimate_T``, stepped below an atom that carries the empirical CDF past eps.

    With continuous data this is ``estimate_T``. When the order statistic sits
    on a tie whose empirical CDF exceeds ``eps``, truncating at it would discard
    the atom; the cutoff drops to the largest strictly smaller sample (or 0).
    """
    t = estimate_T(max_samples, eps)
    xs = np.sort(np.asarray(max_samples, dtype=float))
    if np.searchsorted(xs, t, side="right") <= eps * xs.size + _RANK_SLACK:
        return t
    below = xs[xs < t]
    return float(below[-1]) if below.size else 0.0


def classify_large(emp_cdfs: Sequence[EmpiricalCDF], T: float, eps: float) -> frozenset[int]:
    """Indices whose empirical mass above T exceeds (1-eps) eps."""
    cut = (1.0 - eps) * eps
    return frozenset(i for i, f in enumerate(emp_cdfs) if 1.0 - f(T) > cut)


def estimate_M(small_max_samples: Sequence[float], eps: float) -> float:
    """Empirical (1-eps)^2 quantile of the maximum over the small variables."""
    k = len(small_max_samples)
    r = _rank(k, (1.0 - eps) ** 2)
    if r < 1:
        raise BudgetError(f"kM={k} too small for eps={eps}")
    return order_statistic(small_max_samples, r)


def estimate_Mi(samples_i: Sequence[float], eps: float) -> float:
    """Empirical (1-eps^3)^2 quantile of one large variable."""
    k = len(samples_i)
    r = _rank(k, (1.0 - eps ** 3) ** 2)
    if r < 1:
        raise BudgetError(f"kMi={k} too small for eps={eps}")
    return order_statistic(samples_i, r)


def empirical_geometric_cdf(small_max_samples: Sequence[float], s: int) -> DiscreteDistribution:
    """H-hat^(1/s), where H-hat is the empirical CDF of the small-variable maximum."""
    if s < 1:
        raise ParameterError("s must be at least 1")
    h = EmpiricalCDF(np.asarray(small_max_samples, dtype=float))
    support = np.unique(h.values)
    return DiscreteDistribution.from_cdf(support, h(support) ** (1.0 / s))


def dkw_radius(k: int) -> float:
    if k < 2:
        raise ParameterError("dkw_radius needs k >= 2")
    return math.sqrt(math.log(k) / k)


def sup_distance(F: DiscreteDistribution, emp: EmpiricalCDF) -> float:
    """sup_x |F(x) - F-hat(x)|, attained on the union of jump points."""
    grid = np.union1d(np.asarray(F.support), emp.values)
    return float(np.max(np.abs(cdf_values(F, grid) - emp(grid))))


def multiplicative_band_check(F: DiscreteDistribution, Fp: DiscreteDistribution, M: float, eps: float,
                              tol: float = 1e-12) -> bool:
    """(1-eps)(1-Fp) <= 1-F <= (1+eps)(1-Fp) at every merged-support point <= M."""
    if M < 0:
        raise ParameterError("M must be non-negative")
    grid = merged_support([F, Fp])
    grid = grid[grid <= M]
    if grid.size == 0:
        return True
    tail = 1.0 - cdf_values(F, grid)
    tail_p = 1.0 - cdf_values(Fp, grid)
    return bool(np.all(tail >= (1.0 - eps) * tail_p - tol) and np.all(tail <= (1.0 + eps) * tail_p + tol))


@dataclass(frozen=True)
class ClassificationResult:
    T: float
    L: frozenset[int]
    S: frozenset[int]
    M: float
    M_i: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.L & self.S:
            raise ParameterError("L and S overlap")
        if self.T < 0 or self.M < 0 or any(v < 0 for v in self.M_i.values()):
            raise ParameterError("thresholds must be non-negative")
        if set(self.M_i) != set(self.L):
            raise ParameterError("M_i must be keyed exactly by L")

    @property
    def n(self) -> int:
        return len(self.L) + len(self.S)

    def lines(self) -> list[str]:
        """One ``field=value`` line per field, values at 6 decimals."""
        return [
            f"T={self.T:.6f}",
            "L=" + " ".join(str(i) for i in sorted(self.L)),
            "S=" + " ".join(str(i) for i in sorted(self.S)),
            f"M={self.M:.6f}",
            "M_i=" + " ".join(f"{i}:{self.M_i[i]:.6f}" for i in sorted(self.M_i)),
        ]


def _check_rows(samples: SampleMatrix, budget: SampleBudget) -> dict[str, slice]:
    if samples.k < budget.total:
        raise BudgetError(f"sample matrix has {samples.k} rows, budget needs {budget.total}")
    return budget.blocks()


def classify(samples: SampleMatrix, eps: float, budget: SampleBudget | None = None) -> ClassificationResult:
    """Run the classification stages T -> L -> M -> M_i on disjoint row blocks."""
    budget = budget or sample_budget(eps)
    blocks = _check_rows(samples, budget)
    n = samples.n

    T = tie_adjusted_T(samples.block(blocks["k1"]).max(axis=1), eps)

    l_rows = samples.block(blocks["k2"])
    L = classify_large([EmpiricalCDF(l_rows[:, i]) for i in range(n)], T, eps)
    S = frozenset(range(n)) - L

    M = 0.0
    if S:
        cols = sorted(S)
        M = estimate_M(samples.block(blocks["kM"])[:, cols].max(axis=1), eps)

    mi_rows = samples.block(blocks["kMi"])
    M_i = {i: estimate_Mi(mi_rows[:, i], eps) for i in sorted(L)}
    return ClassificationResult(T=T, L=L, S=S, M=M, M_i=M_i)


def estimate_distributions(samples: SampleMatrix, cls: ClassificationResult, eps: float,
                           budget: SampleBudget | None = None):
    """G-hat from the small-variable maxima and F-hat_i for each large variable.

    Returns ``(G_hat, large_emp)``; ``G_hat`` is None when there are no small
    variables.
    """
    budget = budget or sample_budget(eps)
    blocks = _check_rows(samples, budget)
    G_hat = None
    if cls.S:
        cols = sorted(cls.S)
        G_hat = empirical_geometric_cdf(samples.block(blocks["kG"])[:, cols].max(axis=1), len(cols))
    l_rows = samples.block(blocks["kL"])
    large_emp = {i: EmpiricalCDF(l_rows[:, i]).to_distribution() for i in sorted(cls.L)}
    return G_hat, large_emp


def true_L_star(inst: Instance, T_star: float, eps: float) -> frozenset[int]:
    """{i : 1 - F_i(T*) > eps} for a known instance."""
    return frozenset(i for i, d in enumerate(inst.dists) if 1.0 - float(cdf_values(d, T_star)) > eps)


def true_T_star(inst: Instance, eps: float) -> float:
    """Smallest support point of the maximum where its CDF reaches eps."""
    grid = merged_support(inst)
    h = np.ones(len(grid))
    for d in inst.dists:
        h *= cdf_values(d, grid)
    k = int(np.searchsorted(h, eps - 1e-15, side="left"))
    return float(grid[min(k, len(grid) - 1)])


def l_star_bound(eps: float) -> float:
    """|L*| < log(1/eps) / log(1/(1-eps))."""
    return math.log(1.0 / eps) / math.log(1.0 / (1.0 - eps))
