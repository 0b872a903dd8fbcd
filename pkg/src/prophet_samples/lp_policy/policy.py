"""Executable randomized stopping policies.

Variables are addressed through *group ids*: every original index maps to a
group (``roles``), and members of a group are interchangeable. A
prophet-secretary policy is indexed by multiset states, i.e. tuples holding
the number of not-yet-seen members of each group. A free-order policy first
draws an ordering of group ids and is then indexed by (position, ordering).

At each arrival the realized value passes, in order, through the smoothing
jitter, the Bernoulli filter, the lower cutoff ``floor`` and the tail rule
before the acceptance table is consulted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, Mapping, Sequence

import numpy as np

from ..distributions import Instance, ModelKind
from ..errors import ParameterError, PolicyCoverageError
from ..reduction import Jitter

MultisetState = tuple  # remaining multiplicity per group id


def all_states(multiplicity: Sequence[int]) -> list[MultisetState]:
    """Every sub-multiset of U, largest first."""
    states = list(itertools.product(*(range(m + 1) for m in multiplicity)))
    states.sort(key=lambda s: (-sum(s), tuple(-c for c in s)))
    return states


def support_of(state: MultisetState) -> tuple[int, ...]:
    return tuple(g for g, c in enumerate(state) if c > 0)


def without(state: MultisetState, g: int) -> MultisetState:
    return state[:g] + (state[g] - 1,) + state[g + 1:]


def multiset_orderings(multiplicity: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """Distinct sequences with ``multiplicity[g]`` copies of each id, lexicographic."""
    counts = list(multiplicity)
    n = sum(counts)
    seq: list[int] = []

    def rec():
        if len(seq) == n:
            yield tuple(seq)
            return
        for g, c in enumerate(counts):
            if c:
                counts[g] -= 1
                seq.append(g)
                yield from rec()
                seq.pop()
                counts[g] += 1

    yield from rec()


@dataclass(frozen=True)
class RandomizedPolicy:
    kind: ModelKind
    roles: tuple[int, ...]
    supports: tuple[tuple[float, ...], ...]
    # PS: (state, gid, j) -> p;  FO: (t, j, sigma) -> p
    accept_prob: Mapping
    order_dist: Mapping[tuple[int, ...], float] = field(default_factory=dict)
    tail: tuple[float, ...] | None = None
    floor: float = 0.0
    p_keep: float = 1.0
    jitter: Jitter | None = None

    def __post_init__(self):
        if self.kind not in (ModelKind.PROPHET_SECRETARY, ModelKind.FREE_ORDER):
            raise ParameterError("policies are state-indexed (PS) or order-indexed (FO)")
        if any(not -1e-12 <= p <= 1 + 1e-12 for p in self.accept_prob.values()):
            raise ParameterError("acceptance probabilities must lie in [0, 1]")
        if self.kind is ModelKind.FREE_ORDER:
            total = sum(self.order_dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ParameterError(f"order distribution sums to {total}")
        if not 0.0 < self.p_keep <= 1.0:
            raise ParameterError("p_keep must lie in (0, 1]")

    @property
    def n(self) -> int:
        return len(self.roles)

    @cached_property
    def multiplicity(self) -> tuple[int, ...]:
        counts = [0] * len(self.supports)
        for g in self.roles:
            counts[g] += 1
        return tuple(counts)

    @cached_property
    def members(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.supports]
        for i, g in enumerate(self.roles):
            out[g].append(i)
        return tuple(tuple(m) for m in out)

    @cached_property
    def _value_index(self) -> tuple[dict[float, int], ...]:
        return tuple({v: j for j, v in enumerate(sup)} for sup in self.supports)

    @cached_property
    def _tables(self) -> dict:
        """(ctx, gid) -> array of acceptance probabilities over the support."""
        tables: dict = {}
        if self.kind is ModelKind.PROPHET_SECRETARY:
            for (state, g, j), p in self.accept_prob.items():
                tables.setdefault((state, g), np.zeros(len(self.supports[g])))[j] = p
        else:
            for (t, j, sigma), p in self.accept_prob.items():
                g = sigma[t]
                tables.setdefault(((t, sigma), g), np.zeros(len(self.supports[g])))[j] = p
        return tables

    def table(self, ctx, g: int) -> np.ndarray:
        try:
            return self._tables[(ctx, g)]
        except KeyError:
            raise PolicyCoverageError(f"no acceptance rule for context {ctx!r}, group {g}") from None

    def decide(self, ctx, g: int, seen: float) -> tuple[float, bool]:
        """Acceptance probability for an already filtered/jittered value.

        Returns ``(probability, off_support)``. A value absent from the
        group's support is accepted iff it exceeds the smallest support value
        whose acceptance probability is at least 1/2; an unlisted zero is
        rejected without being flagged.
        """
        x = 0.0 if seen <= self.floor else seen
        if self.tail is not None and x > self.tail[g]:
            return 1.0, False
        probs = self.table(ctx, g)
        j = self._value_index[g].get(x)
        if j is not None:
            return float(probs[j]), False
        if x == 0.0:
            return 0.0, False  # stopping on a zero is never useful
        for v, p in zip(self.supports[g], probs):
            if p >= 0.5:
                return (1.0 if x > v else 0.0), True
        return 0.0, True

    def accept_probability(self, ctx, g: int, x: float) -> float:
        """P(accept | realized value x), averaging jitter and filter exactly."""
        if self.jitter is None:
            kept = self.decide(ctx, g, x)[0]
        else:
            kept = float(np.mean([self.decide(ctx, g, x + o)[0] for o in self.jitter.offsets]))
        if self.p_keep == 1.0:
            return kept
        return self.p_keep * kept + (1.0 - self.p_keep) * self.decide(ctx, g, 0.0)[0]

    def act(self, ctx, g: int, x: float, rng: np.random.Generator) -> tuple[bool, bool]:
        """Sample the decision for realized value x; returns (accept, off_support)."""
        seen = x
        if self.jitter is not None:
            seen = seen + self.jitter.draw(rng)
        if self.p_keep < 1.0 and rng.random() >= self.p_keep:
            seen = 0.0
        p, off = self.decide(ctx, g, seen)
        return (p >= 1.0 or (p > 0.0 and rng.random() < p)), off

    def initial_state(self) -> MultisetState:
        return self.multiplicity


def attach_tail_rule(pol: RandomizedPolicy, thresholds: Mapping[int, float]) -> RandomizedPolicy:
    """Force acceptance of any value strictly above its group's threshold."""
    if any(t < 0 for t in thresholds.values()):
        raise ParameterError("thresholds must be non-negative")
    tail = tuple(float(thresholds.get(g, np.inf)) for g in range(len(pol.supports)))
    return replace(pol, tail=tail)


def uniform_policy(inst: Instance, prob: float | None = None, kind: ModelKind = ModelKind.PROPHET_SECRETARY,
                   rule=None, roles: Sequence[int] | None = None) -> RandomizedPolicy:
    """A full acceptance table over the instance's groups.

    ``rule(ctx, g, value) -> probability`` fills the table; ``prob`` is a
    shortcut for a constant rule. Free-order policies use the identity
    ordering of groups (lexicographically smallest) with probability one.
    """
    if rule is None:
        if prob is None:
            raise ParameterError("give either prob or rule")
        rule = lambda ctx, g, v: prob  # noqa: E731
    roles = tuple(inst.roles() if roles is None else roles)
    ngroups = max(roles) + 1
    reps = [roles.index(g) for g in range(ngroups)]
    supports = tuple(inst.dists[i].support for i in reps)
    mult = [roles.count(g) for g in range(ngroups)]
    table = {}
    if kind is ModelKind.PROPHET_SECRETARY:
        for state in all_states(mult):
            for g in support_of(state):
                for j, v in enumerate(supports[g]):
                    table[(state, g, j)] = float(rule(state, g, v))
        return RandomizedPolicy(kind, roles, supports, table)
    sigma = next(multiset_orderings(mult))
    for t, g in enumerate(sigma):
        for j, v in enumerate(supports[g]):
            table[(t, j, sigma)] = float(rule((t, sigma), g, v))
    return RandomizedPolicy(kind, roles, supports, table, order_dist={sigma: 1.0})
