"""Instance transformations: the auxiliary i.i.d. instance, jitter, Bernoulli filtering."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distributions import (
    DiscreteDistribution,
    Instance,
    _compact,
    censor_above,
    truncate_below,
)
from .errors import ParameterError
from .estimation import ClassificationResult

DEFAULT_GRID = 64


@dataclass(frozen=True)
class AuxiliaryInstance:
    """Estimated instance the policy is synthesized on.

    ``inst`` lists the |S| pooled copies first, then one censored estimate per
    large variable in increasing original index. ``roles[i]`` is the group id
    of original variable ``i`` (pooled small variables share id 0 when S is
    non-empty), and ``thresholds[g]`` is the censoring cap of group ``g``.
    """

    inst: Instance
    small: tuple[int, ...]
    large: tuple[int, ...]
    roles: tuple[int, ...]
    thresholds: tuple[float, ...]
    floor: float

    def __post_init__(self):
        for d, g in zip(self.inst.dists, self.inst.roles()):
            if d.support[-1] > self.thresholds[g]:
                raise ParameterError("auxiliary distribution has mass above its cap")


def build_auxiliary(orig_n: int, cls: ClassificationResult, G_hat: DiscreteDistribution | None,
                    large_emp: Mapping[int, DiscreteDistribution]) -> AuxiliaryInstance:
    if cls.n != orig_n:
        raise ParameterError(f"classification covers {cls.n} variables, expected {orig_n}")
    if not cls.S and not cls.L:
        raise ParameterError("empty classification")
    small = tuple(sorted(cls.S))
    large = tuple(sorted(cls.L))
    dists: list[DiscreteDistribution] = []
    thresholds: list[float] = []
    if small:
        if G_hat is None:
            raise ParameterError("small variables present but no pooled distribution given")
        pooled = censor_above(truncate_below(G_hat, cls.T), cls.M)
        dists += [pooled] * len(small)
        thresholds.append(cls.M)
    for i in large:
        dists.append(censor_above(truncate_below(large_emp[i], cls.T), cls.M_i[i]))
        thresholds.append(cls.M_i[i])
    inst = Instance(tuple(dists), len(small))

    roles = [0] * orig_n
    offset = 1 if small else 0
    for pos, i in enumerate(large):
        roles[i] = pos + offset
    return AuxiliaryInstance(inst=inst, small=small, large=large, roles=tuple(roles),
                             thresholds=tuple(thresholds), floor=cls.T)


@dataclass(frozen=True)
class Jitter:
    """Uniform grid noise on {delta/grid, 2 delta/grid, ..., delta}."""

    delta: float
    grid: int = DEFAULT_GRID

    @property
    def offsets(self) -> np.ndarray:
        return self.delta * np.arange(1, self.grid + 1) / self.grid

    def draw(self, rng: np.random.Generator, size=None):
        return self.delta * rng.integers(1, self.grid + 1, size=size) / self.grid


def make_jitter(eps: float, xstar: float, grid: int = DEFAULT_GRID) -> Jitter:
    if xstar <= 0:
        raise ParameterError("xstar must be positive")
    if grid < 2:
        raise ParameterError("grid must be at least 2")
    return Jitter(delta=eps ** 2 * xstar, grid=grid)


def smooth(data, eps: float, xstar: float, grid: int = DEFAULT_GRID, rng: np.random.Generator | None = None):
    """Add grid jitter of width eps^2 * xstar.

    Arrays get one independent draw per entry (``rng`` required); a
    :class:`DiscreteDistribution` is convolved exactly with the jitter law.
    """
    jit = make_jitter(eps, xstar, grid)
    if jit.delta == 0.0:
        return data
    if isinstance(data, DiscreteDistribution):
        offs = jit.offsets
        values = [v + o for v in data.support for o in offs]
        probs = [p / grid for p in data.probs for _ in offs]
        return _compact(values, probs)
    if rng is None:
        raise ParameterError("smoothing samples needs an rng")
    arr = np.asarray(data, dtype=float)
    return arr + jit.draw(rng, size=arr.shape)


def bernoulli_filter(p_keep: float, rng: np.random.Generator):
    """Endless stream of independent {0, 1} multipliers with P(1) = p_keep."""
    if not 0.0 < p_keep <= 1.0:
        raise ParameterError("p_keep must lie in (0, 1]")
    while True:
        yield 1 if p_keep == 1.0 else int(rng.random() < p_keep)


def filtered_distribution(d: DiscreteDistribution, p_keep: float) -> DiscreteDistribution:
    """Law of X Z with Z ~ Bernoulli(p_keep): 1 - F* = p_keep (1 - F)."""
    if not 0.0 < p_keep <= 1.0:
        raise ParameterError("p_keep must lie in (0, 1]")
    values = list(d.support) + [0.0]
    probs = [p * p_keep for p in d.probs] + [1.0 - p_keep]
    return _compact(values, probs)


def filtered_instance(inst: Instance, p_keep: float) -> Instance:
    return Instance(tuple(filtered_distribution(d, p_keep) for d in inst.dists), inst.num_iid_prefix)
