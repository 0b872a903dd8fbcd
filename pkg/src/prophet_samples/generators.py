"""Seeded instance families used by the experiments and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .distributions import DiscreteDistribution, Instance
from .errors import ParameterError

FAMILIES = ("iid_bernoulli", "sqrt3_example", "random_discrete", "eps_small_random")


def _random_dist(rng: np.random.Generator, max_support: int, top: int = 9, zero_ok: bool = True) -> DiscreteDistribution:
    m = int(rng.integers(1, max_support + 1))
    low = 0 if zero_ok else 1
    values = sorted(rng.choice(np.arange(low, top + 1), size=m, replace=False).tolist())
    weights = rng.integers(1, 10, size=m)
    probs = weights / weights.sum()
    return DiscreteDistribution(tuple(float(v) for v in values), tuple(float(p) for p in probs))


def iid_bernoulli(n: int, p: float = 0.5, value: float = 1.0) -> Instance:
    if not 0.0 < p <= 1.0:
        raise ParameterError("p must lie in (0, 1]")
    d = DiscreteDistribution.point(value) if p == 1.0 else DiscreteDistribution((0.0, value), (1.0 - p, p))
    return Instance.iid(d, n)


def sqrt3_example(n: int) -> Instance:
    """n-1 copies of {0: 1-1/n^2, n: 1/n^2} followed by the constant sqrt(3)-1."""
    if n < 2:
        raise ParameterError("sqrt3_example needs n >= 2")
    rare = DiscreteDistribution((0.0, float(n)), (1.0 - n ** -2, n ** -2))
    return Instance((rare,) * (n - 1) + (DiscreteDistribution.point(math.sqrt(3.0) - 1.0),), n - 1)


def random_discrete(n: int, s: int, seed: int, max_support: int = 3) -> Instance:
    """An i.i.d. prefix of length s followed by n - s independent random variables."""
    if not 0 <= s <= n:
        raise ParameterError("need 0 <= s <= n")
    rng = np.random.default_rng(seed)
    head = _random_dist(rng, max_support)
    tail = [_random_dist(rng, max_support) for _ in range(n - s)]
    return Instance((head,) * s + tuple(tail), s)


def eps_small_random(n: int, s: int, eps: float, seed: int, max_support: int = 3) -> Instance:
    """s heterogeneous eps-small variables first, then n - s arbitrary ones."""
    if not 0 <= s <= n:
        raise ParameterError("need 0 <= s <= n")
    rng = np.random.default_rng(seed)
    dists = []
    for _ in range(s):
        pos = _random_dist(rng, max(1, max_support - 1), zero_ok=False)
        mass = float(rng.uniform(0.0, eps))
        dists.append(DiscreteDistribution((0.0,) + pos.support, (1.0 - mass,) + tuple(mass * p for p in pos.probs)))
    dists += [_random_dist(rng, max_support) for _ in range(n - s)]
    return Instance(tuple(dists))


def generate(family: str, n: int, seed: int = 0, s: int | None = None, p: float = 0.5, eps: float = 0.2,
             max_support: int = 3) -> Instance:
    if family == "iid_bernoulli":
        return iid_bernoulli(n, p)
    if family == "sqrt3_example":
        return sqrt3_example(n)
    if family == "random_discrete":
        return random_discrete(n, n if s is None else s, seed, max_support)
    if family == "eps_small_random":
        return eps_small_random(n, (n + 1) // 2 if s is None else s, eps, seed, max_support)
    raise ParameterError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
