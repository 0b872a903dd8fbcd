"""Finite-support distributions and instances of the stopping problem.

Everything here is exact arithmetic on step CDFs (up to float rounding):
merged supports are sorted unions with exact value equality, since support
values are user data rather than computed quantities.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import InstanceFormatError, ParameterError

PROB_TOL = 1e-9
# differencing a product of CDFs leaves dust of this order; it is clamped to 0
DUST = 1e-15


class ModelKind(enum.Enum):
    PROPHET_SECRETARY = "ps"
    FREE_ORDER = "fo"
    FIXED_ORDER = "fixed"

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        aliases = {
            "ps": cls.PROPHET_SECRETARY,
            "secretary": cls.PROPHET_SECRETARY,
            "prophet_secretary": cls.PROPHET_SECRETARY,
            "fo": cls.FREE_ORDER,
            "free": cls.FREE_ORDER,
            "free_order": cls.FREE_ORDER,
            "fixed": cls.FIXED_ORDER,
            "fixed_order": cls.FIXED_ORDER,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ParameterError(f"unknown model {text!r}") from None


@dataclass(frozen=True)
class DiscreteDistribution:
    """A non-negative random variable with finitely many values."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        support = tuple(float(v) for v in self.support)
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        if len(support) == 0 or len(support) != len(probs):
            raise ParameterError("support and probs must be non-empty and equal length")
        if any(not math.isfinite(v) or v < 0 for v in support):
            raise ParameterError("support values must be finite and non-negative")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ParameterError("support must be strictly increasing")
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise ParameterError("probabilities must lie in [0, 1]")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise ParameterError(f"probabilities sum to {math.fsum(probs)!r}, not 1")

    @classmethod
    def from_dict(cls, mapping: Mapping[float, float]) -> "DiscreteDistribution":
        return _compact(list(mapping.keys()), list(mapping.values()), drop_zero=False)

    @classmethod
    def point(cls, value: float) -> "DiscreteDistribution":
        return cls((float(value),), (1.0,))

    @classmethod
    def from_cdf(cls, values: Sequence[float], cdf_values: Sequence[float]) -> "DiscreteDistribution":
        """Recover a distribution from CDF values on a sorted grid.

        The last CDF value is taken to be 1. Negative or dust-sized
        differences are clamped to 0 and the rest renormalized.
        """
        values = np.asarray(values, dtype=float)
        cdf_values = np.asarray(cdf_values, dtype=float).copy()
        cdf_values[-1] = 1.0
        probs = np.diff(cdf_values, prepend=0.0)
        probs[probs < DUST] = 0.0
        probs /= probs.sum()
        return _compact(values, probs)

    def __len__(self):
        return len(self.support)

    def as_dict(self) -> dict[float, float]:
        return dict(zip(self.support, self.probs))

    @cached_property
    def cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        return cum

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.support, self.probs))

    @property
    def mass_at_zero(self) -> float:
        return self.probs[0] if self.support[0] == 0.0 else 0.0

    def __call__(self, x: float) -> float:
        return cdf(self, x)


def _compact(values, probs, drop_zero: bool = True) -> DiscreteDistribution:
    """Merge repeated values, sort, and optionally drop zero-probability points."""
    acc: dict[float, float] = {}
    for v, p in zip(values, probs):
        acc[float(v)] = acc.get(float(v), 0.0) + float(p)
    items = sorted(acc.items())
    if drop_zero:
        items = [(v, p) for v, p in items if p > 0.0] or items[-1:]
    support = tuple(v for v, _ in items)
    probs = tuple(min(p, 1.0) for _, p in items)
    return DiscreteDistribution(support, probs)


@dataclass(frozen=True)
class Instance:
    """Ordered independent variables; the first ``num_iid_prefix`` are identical."""

    dists: tuple[DiscreteDistribution, ...]
    num_iid_prefix: int = 0

    def __post_init__(self):
        dists = tuple(self.dists)
        object.__setattr__(self, "dists", dists)
        if not dists:
            raise ParameterError("an instance needs at least one variable")
        s = self.num_iid_prefix
        if not 0 <= s <= len(dists):
            raise ParameterError(f"num_iid_prefix={s} outside [0, {len(dists)}]")
        if any(d != dists[0] for d in dists[1:s]):
            raise ParameterError("i.i.d. prefix entries are not identical")

    @classmethod
    def iid(cls, dist: DiscreteDistribution, n: int) -> "Instance":
        return cls((dist,) * n, n)

    @property
    def n(self) -> int:
        return len(self.dists)

    def __len__(self):
        return len(self.dists)

    def __getitem__(self, i) -> DiscreteDistribution:
        return self.dists[i]

    def groups(self) -> tuple[tuple[int, ...], ...]:
        """Index groups that share a role: the i.i.d. prefix, then singletons.

        With ``num_iid_prefix`` 0 or 1 every index is its own group. Group
        ``g`` is the distinct id ``g`` used by the reduced programs.
        """
        head = max(self.num_iid_prefix, 1)
        return (tuple(range(head)),) + tuple((i,) for i in range(head, self.n))

    def roles(self) -> tuple[int, ...]:
        """Map each index to its group id."""
        head = max(self.num_iid_prefix, 1)
        return tuple(0 if i < head else i - head + 1 for i in range(self.n))


DistsLike = Union[Instance, Sequence[DiscreteDistribution]]


def _dists(obj: DistsLike) -> Sequence[DiscreteDistribution]:
    return obj.dists if isinstance(obj, Instance) else obj


def cdf(d: DiscreteDistribution, x: float) -> float:
    """P(X <= x), right-continuous."""
    k = np.searchsorted(d.support, x, side="right")
    return 0.0 if k == 0 else float(d.cumulative[k - 1])


def cdf_values(d: DiscreteDistribution, xs) -> np.ndarray:
    k = np.searchsorted(d.support, np.asarray(xs, dtype=float), side="right")
    padded = np.concatenate(([0.0], d.cumulative))
    return padded[k]


def cdf_left(d: DiscreteDistribution, xs) -> np.ndarray:
    """P(X < x)."""
    k = np.searchsorted(d.support, np.asarray(xs, dtype=float), side="left")
    padded = np.concatenate(([0.0], d.cumulative))
    return padded[k]


def merged_support(dists: DistsLike) -> np.ndarray:
    return np.unique(np.concatenate([d.support for d in _dists(dists)]))


def max_cdf(dists: DistsLike, xs) -> np.ndarray:
    """CDF of the maximum of independent draws, evaluated at ``xs``."""
    out = np.ones(np.shape(xs))
    for d in _dists(dists):
        out = out * cdf_values(d, xs)
    return out


def max_distribution(dists: DistsLike) -> DiscreteDistribution:
    grid = merged_support(dists)
    return DiscreteDistribution.from_cdf(grid, max_cdf(dists, grid))


def exact_expected_max(inst: DistsLike) -> float:
    """E[max X_i] for independent X_i, summed over the merged support."""
    grid = merged_support(inst)
    h = max_cdf(inst, grid)
    jumps = np.diff(h, prepend=0.0)
    return float(math.fsum(grid * jumps))


def expected_above(d: DiscreteDistribution, tau: float, strict: bool = True) -> float:
    """E[X 1{X > tau}] (or 1{X >= tau} when ``strict`` is False)."""
    if strict:
        return math.fsum(v * p for v, p in zip(d.support, d.probs) if v > tau)
    return math.fsum(v * p for v, p in zip(d.support, d.probs) if v >= tau)


def expected_max_with(d: DiscreteDistribution, v: float) -> float:
    """E[max(X, v)]."""
    return math.fsum(max(x, v) * p for x, p in zip(d.support, d.probs))


def geometric_mean_cdf(dists: Sequence[DiscreteDistribution], s: int | None = None) -> DiscreteDistribution:
    """Distribution whose CDF is the geometric mean of the given CDFs.

    ``s`` i.i.d. draws from the result have the same maximum law as one draw
    from each input.
    """
    if s is None:
        s = len(dists)
    if s < 1 or s != len(dists):
        raise ParameterError(f"s={s} must equal the number of distributions ({len(dists)})")
    if all(d == dists[0] for d in dists):
        return dists[0]
    grid = merged_support(dists)
    logs = np.zeros(len(grid))
    zero = np.zeros(len(grid), dtype=bool)
    for d in dists:
        f = cdf_values(d, grid)
        zero |= f <= 0.0
        with np.errstate(divide="ignore"):
            logs += np.log(np.where(f > 0.0, f, 1.0))
    g = np.where(zero, 0.0, np.exp(logs / s))
    return DiscreteDistribution.from_cdf(grid, g)


def truncate_below(d: DiscreteDistribution, threshold: float) -> DiscreteDistribution:
    """Law of X 1{X > threshold}: mass on values <= threshold moves to 0."""
    if threshold < 0:
        raise ParameterError("threshold must be non-negative")
    values = [v if v > threshold else 0.0 for v in d.support]
    return _compact(values, d.probs)


def censor_above(d: DiscreteDistribution, cap: float) -> DiscreteDistribution:
    """Law of X 1{X <= cap}: mass on values > cap moves to 0."""
    if cap < 0:
        raise ParameterError("cap must be non-negative")
    values = [v if v <= cap else 0.0 for v in d.support]
    return _compact(values, d.probs)


def is_eps_small(d: DiscreteDistribution, eps: float) -> bool:
    return d.mass_at_zero >= 1.0 - eps - 1e-15


def sample(d: DiscreteDistribution, rng: np.random.Generator) -> float:
    """One inverse-CDF draw."""
    k = int(np.searchsorted(d.cumulative, rng.random(), side="right"))
    return d.support[min(k, len(d.support) - 1)]


def sample_many(d: DiscreteDistribution, rng: np.random.Generator, size) -> np.ndarray:
    k = np.searchsorted(d.cumulative, rng.random(size), side="right")
    return np.asarray(d.support)[np.minimum(k, len(d.support) - 1)]


def sample_instance(inst: DistsLike, rng: np.random.Generator, rows: int) -> np.ndarray:
    """A rows x n matrix whose column i holds independent draws of X_i."""
    dists = _dists(inst)
    return np.column_stack([sample_many(d, rng, rows) for d in dists])


# -- instance files -----------------------------------------------------------
#
#   n s
#   m v1 p1 v2 p2 ... vm pm        (one line per variable)


def format_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {inst.num_iid_prefix}"]
    for d in inst.dists:
        body = " ".join(f"{v!r} {p!r}" for v, p in zip(d.support, d.probs))
        lines.append(f"{len(d)} {body}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InstanceFormatError("empty instance file")
    try:
        n, s = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise InstanceFormatError(f"bad header line {lines[0]!r}") from None
    if len(lines) != n + 1:
        raise InstanceFormatError(f"header announces {n} variables, found {len(lines) - 1}")
    dists = []
    for ln in lines[1:]:
        toks = ln.split()
        try:
            m = int(toks[0])
            nums = [float(t) for t in toks[1:]]
        except (ValueError, IndexError):
            raise InstanceFormatError(f"bad distribution line {ln!r}") from None
        if len(nums) != 2 * m:
            raise InstanceFormatError(f"expected {m} value/probability pairs in {ln!r}")
        try:
            dists.append(DiscreteDistribution(tuple(nums[0::2]), tuple(nums[1::2])))
        except ParameterError as exc:
            raise InstanceFormatError(f"{exc} in line {ln!r}") from None
    try:
        return Instance(tuple(dists), s)
    except ParameterError as exc:
        raise InstanceFormatError(str(exc)) from None


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(format_instance(inst))


def instance_from_dicts(rows: Iterable[Mapping[float, float]], num_iid_prefix: int = 0) -> Instance:
    return Instance(tuple(DiscreteDistribution.from_dict(r) for r in rows), num_iid_prefix)
