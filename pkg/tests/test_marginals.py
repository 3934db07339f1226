import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactcond.errors import UnboundedDensity
from exactcond.marginals import (
    AbsWeightedGaussian,
    Bernoulli,
    Beta,
    Binomial,
    CountingRng,
    Exponential,
    Geometric,
    NegativeBinomial,
    Normal,
    Poisson,
    SignedUnit,
    UniformInt,
    UniformReal,
    derive_seed,
)
from exactcond.verify import chi_squared_gof, ks_statistic


def test_counting_rng_counts_every_uniform():
    rng = CountingRng(1)
    assert rng.calls == 0
    rng.uniform()
    assert rng.calls == 1
    rng.uniforms(100)
    assert rng.calls == 101
    rng.uniforms(5000)
    assert rng.calls == 5101


def test_counting_rng_stream_order_is_call_shape_independent():
    # the j-th uniform consumed must be the same double no matter how
    # scalar and bulk requests interleave
    a = CountingRng(42)
    b = CountingRng(42)
    seq_a = [a.uniform() for _ in range(10)]
    seq_b = list(b.uniforms(3)) + [b.uniform()] + list(b.uniforms(6))
    assert seq_a == pytest.approx(seq_b, abs=0.0)


def test_counting_rng_bulk_spans_buffer_boundary():
    a = CountingRng(7)
    b = CountingRng(7)
    big = 4096 + 123
    left = list(a.uniforms(big))
    right = [b.uniform() for _ in range(big)]
    assert left == right


def test_counting_rng_reproducible():
    assert [CountingRng(9).uniform() for _ in range(1)] == [CountingRng(9).uniform()]


def test_derive_seed_spreads_indices():
    seeds = {derive_seed(1234, i) for i in range(200)}
    assert len(seeds) == 200
    assert derive_seed(1234, 0) == derive_seed(1234, 0)
    assert derive_seed(1234, 0) != derive_seed(1235, 0)


def test_geometric_pmf_and_mode():
    g = Geometric(0.5)
    assert g.pmf(0) == pytest.approx(0.5)
    assert g.pmf(3) == pytest.approx(0.5 ** 3 * 0.5)
    assert g.pmf(-1) == 0.0
    assert g.max_pmf() == (0, pytest.approx(0.5))
    assert g.support_bounds() == (0, None)


def test_geometric_sampling_costs_one_uniform_and_matches_pmf():
    g = Geometric(0.6)
    rng = CountingRng(3)
    draws = [g.sample(rng) for _ in range(20000)]
    assert rng.calls == 20000
    counts: dict = {}
    for k in draws:
        counts[k] = counts.get(k, 0) + 1
    support = range(0, max(counts) + 1)
    _, _, p = chi_squared_gof(
        {k: counts.get(k, 0) for k in support}, {k: g.pmf(k) for k in support}
    )
    assert p > 1e-3


def test_poisson_mode_breaks_ties_downward():
    assert Poisson(3.7).max_pmf()[0] == 3
    # integer rate ties pmf(rate-1) == pmf(rate); report the smaller
    p4 = Poisson(4.0)
    assert p4.max_pmf()[0] == 3
    assert p4.pmf(3) == pytest.approx(p4.pmf(4))
    assert Poisson(0.3).max_pmf()[0] == 0


def test_poisson_zero_rate_is_point_mass():
    p = Poisson(0.0)
    assert p.pmf(0) == 1.0
    assert p.pmf(1) == 0.0
    rng = CountingRng(5)
    assert p.sample(rng) == 0
    assert p.support_bounds() == (0, 0)


def test_poisson_sampling_law_and_cost():
    p = Poisson(2.5)
    rng = CountingRng(11)
    draws = [p.sample(rng) for _ in range(20000)]
    assert rng.calls == 20000
    counts: dict = {}
    for k in draws:
        counts[k] = counts.get(k, 0) + 1
    support = range(0, max(counts) + 1)
    _, _, pval = chi_squared_gof(
        {k: counts.get(k, 0) for k in support}, {k: p.pmf(k) for k in support}
    )
    assert pval > 1e-3


def test_poisson_large_rate_splits_deterministically():
    p = Poisson(1000.0)
    rng = CountingRng(2)
    k = p.sample(rng)
    assert rng.calls == 2
    assert 800 < k < 1200
    mean = np.mean([p.sample(rng) for _ in range(4000)])
    assert mean == pytest.approx(1000.0, rel=0.02)


def test_bernoulli_and_binomial_modes():
    b = Bernoulli(0.3)
    assert b.max_pmf() == (0, pytest.approx(0.7))
    assert Binomial(10, 0.5).max_pmf()[0] == 5
    # (m+1)p integral ties the pmf at two neighbours; take the smaller
    tie = Binomial(9, 0.5)
    assert tie.max_pmf()[0] == 4
    assert tie.pmf(4) == pytest.approx(tie.pmf(5))


def test_binomial_law():
    b = Binomial(6, 0.37)
    rng = CountingRng(13)
    draws = [b.sample(rng) for _ in range(20000)]
    assert rng.calls == 20000
    counts = {k: 0 for k in range(7)}
    for k in draws:
        counts[k] += 1
    _, _, pval = chi_squared_gof(counts, {k: b.pmf(k) for k in range(7)})
    assert pval > 1e-3
    assert sum(b.pmf(k) for k in range(7)) == pytest.approx(1.0)


def test_negative_binomial_mode_tie():
    nb = NegativeBinomial(3, 0.5)
    # (m-1)x/(1-x) = 2 exactly, so pmf(1) == pmf(2); smaller argmax wins
    assert nb.pmf(1) == pytest.approx(nb.pmf(2))
    assert nb.max_pmf()[0] == 1
    assert NegativeBinomial(1, 0.4).max_pmf()[0] == 0


def test_negative_binomial_law():
    nb = NegativeBinomial(2, 0.45)
    rng = CountingRng(17)
    draws = [nb.sample(rng) for _ in range(20000)]
    assert rng.calls == 20000
    counts: dict = {}
    for k in draws:
        counts[k] = counts.get(k, 0) + 1
    support = range(0, max(counts) + 1)
    _, _, pval = chi_squared_gof(
        {k: counts.get(k, 0) for k in support}, {k: nb.pmf(k) for k in support}
    )
    assert pval > 1e-3


def test_uniform_int_and_signed_unit():
    u = UniformInt(2, 5)
    assert u.pmf(2) == pytest.approx(0.25)
    assert u.pmf(6) == 0.0
    assert u.max_pmf() == (2, pytest.approx(0.25))
    s = SignedUnit()
    assert s.pmf(0) == 0.0
    assert s.in_support(-1) and s.in_support(1) and not s.in_support(0)
    assert list(s.support_iter()) == [-1, 1]
    rng = CountingRng(23)
    draws = [s.sample(rng) for _ in range(2000)]
    assert rng.calls == 2000
    assert set(draws) == {-1, 1}


@given(st.floats(min_value=0.05, max_value=0.95), st.integers(min_value=0, max_value=60))
def test_geometric_max_pmf_dominates(ratio, k):
    g = Geometric(ratio)
    assert g.max_pmf()[1] >= g.pmf(k)


@given(st.floats(min_value=0.05, max_value=30.0), st.integers(min_value=0, max_value=80))
@settings(max_examples=60)
def test_poisson_max_pmf_dominates(rate, k):
    p = Poisson(rate)
    assert p.max_pmf()[1] >= p.pmf(k) * (1.0 - 1e-12)


@given(
    st.integers(min_value=1, max_value=25),
    st.floats(min_value=0.05, max_value=0.95),
    st.integers(min_value=0, max_value=30),
)
@settings(max_examples=60)
def test_binomial_max_pmf_dominates(m, p, k):
    b = Binomial(m, p)
    assert b.max_pmf()[1] >= b.pmf(k) * (1.0 - 1e-12)


def test_exponential_inversion():
    e = Exponential(2.0)
    rng = CountingRng(29)
    draws = [e.sample(rng) for _ in range(20000)]
    assert rng.calls == 20000
    _, p = ks_statistic(draws, lambda y: -math.expm1(-2.0 * y) if y > 0 else 0.0)
    assert p > 1e-3
    assert e.sup_pdf() == pytest.approx(2.0)
    assert e.pdf(-0.5) == 0.0


def test_uniform_real():
    u = UniformReal(1.0, 3.0)
    assert u.pdf(2.0) == pytest.approx(0.5)
    assert u.pdf(0.0) == 0.0
    assert u.sup_pdf() == pytest.approx(0.5)
    rng = CountingRng(31)
    draws = [u.sample(rng) for _ in range(5000)]
    assert rng.calls == 5000
    assert min(draws) >= 1.0 and max(draws) <= 3.0


def test_normal_costs_two_uniforms():
    n = Normal(0.0, 1.0)
    rng = CountingRng(37)
    draws = [n.sample(rng) for _ in range(20000)]
    assert rng.calls == 40000
    _, p = ks_statistic(draws, lambda y: 0.5 * (1.0 + math.erf(y / math.sqrt(2.0))))
    assert p > 1e-3
    assert n.sup_pdf() == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))


def test_beta_density_and_sampling():
    b = Beta(2.0, 3.0)
    # B(2,3) = 1/12, density 12 y (1-y)^2
    assert b.pdf(0.25) == pytest.approx(12 * 0.25 * 0.75 ** 2)
    assert b.sup_pdf() == pytest.approx(12 * (1 / 3) * (2 / 3) ** 2)
    rng = CountingRng(41)
    from scipy.stats import beta as beta_dist

    draws = [b.sample(rng) for _ in range(20000)]
    _, p = ks_statistic(draws, beta_dist(2.0, 3.0).cdf)
    assert p > 1e-3


def test_beta_flat_and_unbounded_cases():
    assert Beta(1.0, 1.0).sup_pdf() == pytest.approx(1.0)
    assert Beta(1.0, 2.0).sup_pdf() == pytest.approx(2.0)
    with pytest.raises(UnboundedDensity):
        Beta(0.5, 0.5).sup_pdf()
    with pytest.raises(ValueError):
        Beta(0.0, 1.0)


def test_abs_weighted_gaussian():
    a = AbsWeightedGaussian()
    assert a.pdf(1.0) == pytest.approx(math.exp(-1.0))
    peak = 1.0 / math.sqrt(2.0)
    assert a.sup_pdf() == pytest.approx(a.pdf(peak))
    rng = CountingRng(43)
    draws = [a.sample(rng) for _ in range(20000)]
    assert rng.calls == 40000
    # square of a draw is Exponential(1)
    _, p = ks_statistic([d * d for d in draws], lambda y: -math.expm1(-y) if y > 0 else 0.0)
    assert p > 1e-3
    signs = sum(1 for d in draws if d > 0)
    assert abs(signs / len(draws) - 0.5) < 0.02


def test_parameter_validation():
    with pytest.raises(ValueError):
        Geometric(1.0)
    with pytest.raises(ValueError):
        Geometric(0.0)
    with pytest.raises(ValueError):
        Poisson(-1.0)
    with pytest.raises(ValueError):
        Bernoulli(1.5)
    with pytest.raises(ValueError):
        Binomial(0, 0.5)
    with pytest.raises(ValueError):
        NegativeBinomial(2, 1.0)
    with pytest.raises(ValueError):
        UniformInt(3, 2)
    with pytest.raises(ValueError):
        UniformReal(1.0, 1.0)
    with pytest.raises(ValueError):
        Exponential(0.0)
    with pytest.raises(ValueError):
        Normal(0.0, 0.0)
