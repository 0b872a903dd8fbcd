import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prophet_samples.distributions import (
    DiscreteDistribution,
    Instance,
    ModelKind,
    cdf,
    censor_above,
    exact_expected_max,
    expected_above,
    format_instance,
    geometric_mean_cdf,
    is_eps_small,
    max_cdf,
    merged_support,
    parse_instance,
    sample,
    sample_many,
    truncate_below,
)
from prophet_samples.errors import InstanceFormatError, ParameterError

from conftest import SQRT3_M1, dists, instances

D = DiscreteDistribution.from_dict


def test_cdf_examples():
    d = D({0: 0.5, 1: 0.5})
    assert cdf(d, 0) == 0.5
    assert cdf(d, -1) == 0.0
    assert cdf(D({0: 0.9, 10: 0.1}), 10) == 1.0


def test_expected_max_examples():
    assert exact_expected_max(Instance((D({1: 1.0}),))) == 1.0
    assert exact_expected_max(Instance.iid(D({0: 0.5, 1: 0.5}), 2)) == pytest.approx(0.75, abs=1e-15)
    inst = Instance((D({SQRT3_M1: 1.0}), D({0: 0.75, 2: 0.25})))
    assert exact_expected_max(inst) == pytest.approx(0.75 * SQRT3_M1 + 0.5, abs=1e-12)
    assert exact_expected_max(inst) == pytest.approx(1.0490, abs=1e-4)


def test_geometric_mean_examples():
    F = D({0: 0.3, 4: 0.7})
    assert geometric_mean_cdf([F, F, F]) == F
    G = geometric_mean_cdf([D({0: 0.9, 10: 0.1}), D({0: 0.8, 10: 0.2})], 2)
    assert G.support == (0.0, 10.0)
    assert G.probs[0] == pytest.approx(math.sqrt(0.72), abs=1e-12)
    assert G.probs[0] == pytest.approx(0.848528, abs=1e-6)
    assert geometric_mean_cdf([F], 1) == F


def test_truncate_and_censor_examples():
    d = D({0: 0.5, 5: 0.3, 100: 0.2})
    t = truncate_below(d, 5)
    assert t.support == (0.0, 100.0) and t.probs == pytest.approx((0.8, 0.2))
    assert truncate_below(d, 0) == d
    assert truncate_below(D({1: 1.0}), 2) == D({0: 1.0})
    c = censor_above(d, 10)
    assert c.support == (0.0, 5.0) and c.probs == pytest.approx((0.7, 0.3))
    assert censor_above(d, 100) == d
    assert censor_above(D({0: 0.9, 10: 0.1}), 0) == D({0: 1.0})


def test_eps_small_examples():
    assert is_eps_small(D({0: 0.95, 1: 0.05}), 0.1)
    assert not is_eps_small(D({0: 0.80, 1: 0.20}), 0.1)
    assert not is_eps_small(D({1: 1.0}), 0.5)


def test_sampling_examples():
    rng = np.random.default_rng(0)
    assert all(sample(D({7: 1.0}), rng) == 7 for _ in range(20))
    freq = sample_many(D({0: 0.5, 1: 0.5}), np.random.default_rng(1), 100_000).mean()
    assert abs(freq - 0.5) <= 0.01
    a = sample_many(D({0: 0.2, 3: 0.8}), np.random.default_rng(5), 50)
    b = sample_many(D({0: 0.2, 3: 0.8}), np.random.default_rng(5), 50)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("support,probs", [
    ((1.0, 0.0), (0.5, 0.5)),
    ((0.0, 1.0), (0.5, 0.6)),
    ((-1.0, 1.0), (0.5, 0.5)),
    ((0.0,), (-0.1,)),
    ((), ()),
])
def test_invalid_distributions_rejected(support, probs):
    with pytest.raises(ParameterError):
        DiscreteDistribution(support, probs)


def test_iid_prefix_must_be_identical():
    with pytest.raises(ParameterError):
        Instance((D({0: 0.5, 1: 0.5}), D({0: 0.4, 1: 0.6})), 2)


def test_groups_and_roles():
    inst = Instance((D({1: 1.0}),) * 3 + (D({2: 1.0}), D({3: 1.0})), 3)
    assert inst.groups() == ((0, 1, 2), (3,), (4,))
    assert inst.roles() == (0, 0, 0, 1, 2)
    solo = Instance((D({1: 1.0}), D({2: 1.0})))
    assert solo.roles() == (0, 1)


def test_model_kind_parse():
    assert ModelKind.parse("secretary") is ModelKind.PROPHET_SECRETARY
    assert ModelKind.parse("FO") is ModelKind.FREE_ORDER
    with pytest.raises(ParameterError):
        ModelKind.parse("adversarial")


def _enumerated_max(inst):
    total = 0.0
    for outcome in itertools.product(*(zip(d.support, d.probs) for d in inst.dists)):
        total += max(v for v, _ in outcome) * math.prod(p for _, p in outcome)
    return total


@given(instances(max_n=5, max_support=4))
def test_expected_max_matches_enumeration(inst):
    assert exact_expected_max(inst) == pytest.approx(_enumerated_max(inst), abs=1e-10)


@given(st.lists(dists(), min_size=1, max_size=5))
def test_geometric_mean_preserves_law_of_max(ds):
    G = geometric_mean_cdf(ds, len(ds))
    grid = merged_support(ds + [G])
    assert np.allclose(max_cdf([G] * len(ds), grid), max_cdf(ds, grid), atol=1e-12, rtol=0)


@given(dists(), st.integers(0, 10))
def test_truncation_and_censoring_preserve_mass(d, t):
    assert sum(truncate_below(d, t).probs) == pytest.approx(1.0, abs=1e-12)
    assert sum(censor_above(d, t).probs) == pytest.approx(1.0, abs=1e-12)
    assert all(v == 0.0 or v > t for v in truncate_below(d, t).support)
    assert all(v <= t for v in censor_above(d, t).support)


@given(instances(max_n=4), st.floats(0.01, 0.99))
def test_lower_tail_bound(inst, eps):
    """(1-e') E[max] <= E[max 1{max > T}] with e' = H(T), T any support point."""
    grid = merged_support(inst)
    H = max_cdf(inst, grid)
    for T, h in zip(grid, H):
        upper = exact_expected_max(inst) - sum(
            x * (hx - hp) for x, hx, hp in zip(grid, H, np.concatenate([[0.0], H[:-1]])) if x <= T)
        assert (1 - h) * exact_expected_max(inst) <= upper + 1e-12


@given(dists(), st.floats(0, 12))
def test_expected_above_matches_definition(d, tau):
    direct = sum(v * p for v, p in zip(d.support, d.probs) if v > tau)
    assert expected_above(d, tau) == pytest.approx(direct, abs=1e-12)


@given(instances(max_n=5))
def test_instance_file_round_trip(inst):
    assert parse_instance(format_instance(inst)) == inst


@pytest.mark.parametrize("text", [
    "",
    "2 0\n1 1.0 1.0\n",
    "1 0\n2 0.0 0.5 1.0\n",
    "1 0\n2 1.0 0.5 0.0 0.5\n",
    "x y\n1 1.0 1.0\n",
])
def test_malformed_instance_files(text):
    with pytest.raises(InstanceFormatError):
        parse_instance(text)
