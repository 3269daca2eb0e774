import math

import numpy as np
import pytest
from conftest import LOG4, LOG10_9
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import subset_left_quantile, subset_right_quantile

from leakage_lab import (LeakageDistribution, failure_probability, krr_joint, KrrParams,
                         leakage_distribution, left_quantile, left_quantile_variational,
                         make_joint, right_quantile, right_quantile_variational)
from leakage_lab.errors import DeltaOutOfRange, NotAProbabilityVector


def test_reference_distribution(ex1):
    ld = leakage_distribution(ex1)
    np.testing.assert_allclose(ld.values, [LOG10_9, LOG4], atol=1e-12)
    np.testing.assert_allclose(ld.masses, [0.9, 0.1], atol=1e-12)


def test_degenerate_distributions():
    ld = leakage_distribution(make_joint([0.3, 0.7], [[0.5, 0.5], [0.5, 0.5]]))
    assert ld.atoms() == [(0.0, 1.0)]
    p = KrrParams(4, 1.0)
    ld = leakage_distribution(krr_joint(p, [0.25] * 4))
    assert len(ld) == 1
    assert ld.values[0] == pytest.approx(math.log(4 * p.alpha), abs=1e-12)


def test_failure_probability(ex1):
    ld = leakage_distribution(ex1)
    assert failure_probability(ld, LOG10_9) == pytest.approx(0.1, abs=1e-12)
    assert failure_probability(ld, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert failure_probability(ld, LOG4) == 0.0
    assert failure_probability(ld, 10.0) == 0.0


def test_quantiles_reference(ex1):
    ld = leakage_distribution(ex1)
    assert left_quantile(ld, 0.1) == pytest.approx(LOG10_9, abs=1e-12)
    assert left_quantile(ld, 0.05) == pytest.approx(LOG4, abs=1e-12)
    assert right_quantile(ld, 0.1) == pytest.approx(LOG4, abs=1e-12)
    assert right_quantile(ld, 0.95) == pytest.approx(LOG10_9, abs=1e-12)
    assert left_quantile_variational(ld, 0.1) == left_quantile(ld, 0.1)
    assert right_quantile_variational(ld, 0.1) == right_quantile(ld, 0.1)


def test_breakpoint_continuity(ex1):
    ld = leakage_distribution(ex1)
    # at the jump, left takes the low atom and right the high one
    assert left_quantile(ld, 0.1 + 1e-7) == pytest.approx(LOG10_9)
    assert left_quantile(ld, 0.1 - 1e-7) == pytest.approx(LOG4)
    assert right_quantile(ld, 0.1 + 1e-7) == pytest.approx(LOG10_9)
    assert right_quantile(ld, 0.1 - 1e-7) == pytest.approx(LOG4)


def test_single_atom():
    ld = LeakageDistribution([0.7], [1.0])
    for d in (0.01, 0.5, 0.99):
        assert left_quantile(ld, d) == right_quantile(ld, d) == 0.7


def test_merging():
    a = LeakageDistribution([0.3, 0.3, 1.0], [0.2, 0.3, 0.5])
    b = LeakageDistribution([0.3, 1.0], [0.5, 0.5])
    assert a.atoms() == b.atoms()
    for d in (0.1, 0.5, 0.7):
        assert left_quantile(a, d) == left_quantile(b, d)
        assert right_quantile(a, d) == right_quantile(b, d)


@pytest.mark.parametrize("d", [0.0, 1.0, -0.1, 1.5])
def test_delta_range(ex1, d):
    ld = leakage_distribution(ex1)
    for f in (left_quantile, right_quantile, left_quantile_variational, right_quantile_variational):
        with pytest.raises(DeltaOutOfRange):
            f(ld, d)


def test_bad_masses():
    with pytest.raises(NotAProbabilityVector):
        LeakageDistribution([0.1, 0.2], [0.5, 0.6])


atoms = st.lists(st.tuples(st.integers(0, 20), st.integers(1, 10)), min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(atoms, st.floats(0.001, 0.999))
def test_quantile_properties(raw, delta):
    values = [v / 10 for v, _ in raw]
    tot = sum(m for _, m in raw)
    masses = [m / tot for _, m in raw]
    ld = LeakageDistribution(values, masses)
    lo, hi = left_quantile(ld, delta), right_quantile(ld, delta)
    assert lo <= hi
    assert lo == subset_left_quantile(values, masses, delta)
    assert hi == subset_right_quantile(values, masses, delta)
    assert lo == left_quantile_variational(ld, delta)
    assert hi == right_quantile_variational(ld, delta)
    assert failure_probability(ld, lo) <= delta + 1e-9
    d2 = min(delta + 0.05, 0.999)
    assert left_quantile(ld, d2) <= lo and right_quantile(ld, d2) <= hi
