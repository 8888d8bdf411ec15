import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trajscan.coreset import CoresetMethod
from trajscan.errors import ConfigError
from trajscan.sampling import SamplingParams, draw_indices, draw_two_level, net_size, sample_size

from conftest import random_dataset

# (eps, delta, k, n, s) from an independent 50-digit evaluation of the size formulas
SIZE_TABLE = [
    (0.1, 0.05, 1, 10, 93),
    (0.1, 0.5, 1, 10, 35),
    (0.05, 0.05, 1, 20, 369),
    (0.01, 0.05, 1, 100, 9223),
    (0.2, 0.1, 3, 23, 24),
    (0.1, 0.05, 5, 93, 120),
    (0.05, 0.01, 10, 389, 701),
    (0.3, 0.2, 2, 9, 8),
    (0.1, 0.3678794411714423, 1, 10, 43),
    (0.02, 0.05, 4, 502, 2879),
    (0.15, 0.05, 8, 78, 58),
    (0.25, 0.25, 16, 43, 17),
    (0.08, 0.02, 50, 382, 307),
    (0.5, 0.5, 2, 3, 2),
    (0.01, 0.01, 100, 4945, 23051),
    (0.12, 0.07, 7, 89, 83),
    (0.04, 0.1, 20, 496, 836),
    (0.06, 0.03, 12, 300, 422),
    (0.9, 0.9, 1, 2, 1),
    (0.33, 0.05, 1000, 127, 23),
]


@pytest.mark.parametrize("eps,delta,k,n,s", SIZE_TABLE)
def test_size_table(eps, delta, k, n, s):
    p = SamplingParams(eps, delta, k)
    assert net_size(p) == n
    assert sample_size(p) == s


def test_net_size_floor_case():
    assert net_size(SamplingParams(0.1, 0.5, 1, c_net=1.0)) == 10


def test_sample_size_unit_bracket():
    # ln 2 + ln(1/delta) = 1 at delta = 2/e
    assert sample_size(SamplingParams(0.1, 2 / math.e, 1)) == 25


@settings(max_examples=100, deadline=None)
@given(eps=st.floats(0.002, 0.9), delta=st.floats(0.001, 0.9), k=st.integers(1, 500))
def test_size_monotone(eps, delta, k):
    p = SamplingParams(eps, delta, k)
    h = SamplingParams(eps / 2, delta, k)
    assert net_size(h) >= 2 * net_size(p) - 1
    s, s2 = sample_size(p), sample_size(h)
    assert 4 * s - 4 <= s2 <= 4 * s
    assert net_size(SamplingParams(eps, delta, k + 1)) >= net_size(p)
    assert sample_size(SamplingParams(eps, delta, k + 1)) >= s


@pytest.mark.parametrize("kw", [dict(eps=0.0), dict(eps=1.0), dict(delta=0.0), dict(k_bound=0), dict(c_net=0.0)])
def test_invalid_params(kw):
    with pytest.raises(ConfigError):
        SamplingParams(**kw)


def test_draw_indices_capped_and_prefix():
    n_idx, s_idx = draw_indices(7, 100, 100, 3)
    assert list(n_idx) == list(range(7)) and list(s_idx) == list(range(7))
    a, _ = draw_indices(1000, 10, 5, 9)
    b, _ = draw_indices(1000, 20, 5, 9)
    assert set(a) <= set(b)


def test_draw_two_level_deterministic():
    ds = random_dataset(np.random.default_rng(1), 300, 6)
    m = CoresetMethod("all")
    p = SamplingParams(0.2, 0.1, seed=5)
    x = draw_two_level(ds, p, m)
    y = draw_two_level(ds, p, m)
    assert np.array_equal(x.net_idx, y.net_idx) and np.array_equal(x.sample_idx, y.sample_idx)
    assert np.array_equal(x.sample_points.xy, y.sample_points.xy)
    # adapt_k raises k to the largest coreset drawn
    assert x.params.k_bound == max(max(x.net_points.per_traj_k.values()), max(x.sample_points.per_traj_k.values()))
    assert x.n == net_size(x.params) or x.n == len(ds)
    z = draw_two_level(ds, SamplingParams(0.2, 0.1, seed=5, adapt_k=False), m)
    assert z.params.k_bound == 1 and z.n == net_size(SamplingParams(0.2, 0.1))


def test_sample_masses_are_subset_totals():
    ds = random_dataset(np.random.default_rng(2), 200, 3)
    x = draw_two_level(ds, SamplingParams(0.3, 0.3, seed=1, adapt_k=False), CoresetMethod("all"))
    assert x.sample_points.r_total == ds.recorded[x.sample_idx].sum()
    assert x.sample_points.b_total == ds.baseline[x.sample_idx].sum()
