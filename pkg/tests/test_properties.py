import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from np_spectra import (NP, NP_STAR, ROW_SUM, KernelIdentity, RegularityClass, critical_exponent, fit_decay, make_ellipse, make_grid,
                        assemble, weyl_check)
from np_spectra.discretize import OperatorMatrix, QuadratureGrid
from np_spectra.spectral import cluster_moduli, resolved_count, sort_eigenvalues, spectrum

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def _as_operator(entries):
    n = entries.shape[0]
    t = np.arange(n) / n
    pts = np.column_stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)])
    grid = QuadratureGrid(1, t, np.full(n, 1 / n), np.full(n, 1 / n), pts, pts, (n,))
    return OperatorMatrix(entries, grid, KernelIdentity(NP_STAR, 1), ROW_SUM)


@settings(max_examples=60, deadline=None)
@given(hnp.arrays(float, (20, 20), elements=finite), st.sampled_from([0.25, 0.5, 1.0, 2.0]))
def test_weyl_on_random_matrices(entries, p):
    # equal weights make the symmetrized matrix the matrix itself
    spec = spectrum(_as_operator(entries))
    for J in range(1, 21):
        assert weyl_check(spec, p, J).holds


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=30))
def test_sort_is_a_permutation_with_descending_moduli(values):
    out = sort_eigenvalues(values)
    assert sorted(map(complex, out), key=lambda z: (z.real, z.imag)) == \
        sorted(map(complex, values), key=lambda z: (z.real, z.imag))
    assert np.all(np.diff(np.abs(out)) <= 0)


@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=40))
def test_clusters_partition_the_values(values):
    clusters = cluster_moduli(values)
    assert sum(m for _, m in clusters) == len(values)
    centers = [c for c, _ in clusters]
    assert centers == sorted(centers, reverse=True)


@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=40))
def test_resolved_count_of_identical_lists_is_full(values):
    vals = sorted(values, reverse=True)
    assert resolved_count(vals, vals) == len(vals)


@given(st.floats(0.05, 3.0), st.floats(0.1, 10.0))
def test_fit_decay_recovers_synthetic_laws(q, c):
    j = np.arange(1, 121)
    fit = fit_decay(c * j ** -q, (4, 120))
    assert fit.q_hat == pytest.approx(q, abs=1e-12)
    assert fit.c_hat == pytest.approx(c, rel=1e-11)


@given(st.integers(1, 5), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_critical_exponent_monotone_in_alpha(k, a, b):
    lo, hi = sorted((a, b))
    for d in (1, 2):
        assert critical_exponent(d, k, lo) <= critical_exponent(d, k, hi)
    assert critical_exponent(1, k, lo) <= critical_exponent(1, k + 1, lo)
    assert critical_exponent(2, k, lo) == critical_exponent(2, 1, lo)


@given(st.integers(1, 4), st.floats(0.01, 1.0))
def test_regularity_order(k, alpha):
    assert RegularityClass(k, alpha).order == pytest.approx(k + alpha)


@settings(max_examples=10, deadline=None)
@given(st.floats(1.0, 3.0), st.sampled_from([16, 24, 32]))
def test_row_sums_on_ellipses(a, n):
    e = make_ellipse(a, 1.0)
    m = assemble(e, make_grid(e, n), NP)
    np.testing.assert_allclose(m.entries @ np.ones(n), 0.5, atol=1e-14)
