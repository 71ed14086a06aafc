import numpy as np
import pytest

from dgml.discretization import (
    BoundaryCondition,
    DiscretizationConfig,
    OperatorRole,
    SizeCapError,
)
from dgml.twolevel import MethodParams, build_two_level, deflate_constant, error_matrix
from dgml import lfa, spectrum

PER = BoundaryCondition.PERIODIC
DIR = BoundaryCondition.DIRICHLET


def test_eigenvalues_diagonal():
    eigs = spectrum.eigenvalues_dense(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(sorted(eigs.real), [1, 2, 3], atol=1e-13)


def test_eigenvalues_requires_square():
    with pytest.raises(ValueError):
        spectrum.eigenvalues_dense(np.zeros((2, 3)))


def test_eigenvalues_cap(monkeypatch):
    monkeypatch.setenv("DGML_DENSE_CAP", "4")
    with pytest.raises(SizeCapError):
        spectrum.eigenvalues_dense(np.eye(5))


def test_error_block_eigenvalues_match_closed_form():
    params = MethodParams(0.85, 2.1, 0.4)
    k, J = 3, 16
    eigs = spectrum.eigenvalues_dense(lfa.symbol_error(k, J, params).entries)
    cf = lfa.eigenvalues_closed_form(k, J, params)
    expected = np.array([0.0, 0.0, cf.lambda_plus, cf.lambda_minus])
    assert lfa.multiset_deviation(eigs, expected) < 1e-9


def test_dense_error_equals_symbol_union():
    params = MethodParams(0.66, 1.75, 0.58)
    ops = build_two_level(DiscretizationConfig(8, params.penalty, PER), params)
    dense = spectrum.eigenvalues_dense(error_matrix(ops))
    sym = lfa.error_spectrum_symbols(8, params, kernel="pinv")
    assert lfa.multiset_deviation(dense, sym) < 1e-8


# ---------------------------------------------------------------------------
# clustering


def test_cluster_counts_from_flat_symbol_sweep(clustering_triple):
    # J = 32: sixteen phases, each contributing the pair +/-rho and two
    # structural zeros
    lams = []
    for k in range(16):
        cf = lfa.eigenvalues_closed_form(k, 32, clustering_triple)
        lams += [cf.lambda_plus, cf.lambda_minus, 0.0, 0.0]
    clusters = spectrum.cluster_eigenvalues(np.array(lams), 1e-6)
    assert [cl.count for cl in clusters] == [16, 32, 16]
    np.testing.assert_allclose(
        [cl.center.real for cl in clusters], [-0.19732, 0.0, 0.19732], atol=1e-4
    )


def test_cluster_singletons():
    vals = np.array([0.0, 1.0, 2.5, -3.0])
    clusters = spectrum.cluster_eigenvalues(vals, 1e-6)
    assert [cl.count for cl in clusters] == [1, 1, 1, 1]
    assert sum(cl.count for cl in clusters) == 4


def test_cluster_chain_linkage():
    # single linkage: a chain of points spaced below tol forms one cluster
    vals = np.array([0.0, 0.9e-6, 1.8e-6, 5.0])
    clusters = spectrum.cluster_eigenvalues(vals, 1e-6)
    assert [cl.count for cl in clusters] == [3, 1]
    assert clusters[0].radius < 1e-6


def test_cluster_order_independence():
    rng = np.random.default_rng(0)
    vals = np.concatenate([rng.normal(0, 1e-8, 5), rng.normal(1, 1e-8, 7)])
    a = spectrum.cluster_eigenvalues(vals, 1e-6)
    b = spectrum.cluster_eigenvalues(vals[::-1], 1e-6)
    assert [(c.count, c.center) for c in a] == [(c.count, c.center) for c in b]


def test_cluster_tol_validation():
    with pytest.raises(ValueError):
        spectrum.cluster_eigenvalues(np.array([1.0]), 0.0)


def test_dirichlet_clustering_spectrum(clustering_triple):
    # interior clusters at +/-0.19732 and 0, plus a handful of extra
    # boundary-induced eigenvalues whose location depends on the boundary
    # closure (they stay inside the spectral radius for this one)
    ops = build_two_level(DiscretizationConfig(32, clustering_triple.penalty, DIR), clustering_triple)
    report = spectrum.analyze(error_matrix(ops).entries, tol=1e-6)
    assert sum(cl.count for cl in report.clusters) == 64
    big = {round(cl.center.real, 5): cl.count for cl in report.clusters if cl.count >= 14}
    assert big[-0.19732] >= 14 and big[0.19732] >= 14 and big[0.0] == 32
    extras = [cl for cl in report.clusters if cl.count < 14]
    assert 1 <= len(extras) <= 6
    assert abs(report.spectral_radius - 0.19732) < 1e-4


def test_refinement_preserves_cluster_centers(clustering_triple):
    centers = {}
    counts = {}
    for J in (16, 32):
        ops = build_two_level(
            DiscretizationConfig(J, clustering_triple.penalty, PER), clustering_triple
        )
        E = deflate_constant(error_matrix(ops).entries)
        report = spectrum.analyze(E, tol=1e-6)
        main = sorted(
            (cl for cl in report.clusters if cl.count >= J // 4),
            key=lambda cl: cl.center.real,
        )
        centers[J] = [cl.center.real for cl in main]
        counts[J] = [cl.count for cl in main]
    np.testing.assert_allclose(centers[16], centers[32], atol=1e-8)
    # interior clusters double when the mesh is refined
    assert counts[32][0] == 2 * counts[16][0]  # the -rho cluster
    assert counts[32][1] == 2 * counts[16][1]  # the zero cluster


def test_preconditioned_positivity(clustering_triple):
    from dgml.twolevel import preconditioned_matrix

    ops = build_two_level(DiscretizationConfig(32, clustering_triple.penalty, DIR), clustering_triple)
    eigs = spectrum.eigenvalues_dense(preconditioned_matrix(ops))
    assert eigs.real.min() > 0
    assert np.abs(eigs.imag).max() < 1e-8


def test_analyze_accepts_eigenvalue_vector():
    report = spectrum.analyze(np.array([1.0, 1.0, 2.0]), tol=1e-6, role=OperatorRole.ERROR)
    assert report.spectral_radius == 2.0
    assert [cl.count for cl in report.clusters] == [2, 1]
    assert report.operator_role is OperatorRole.ERROR


# ---------------------------------------------------------------------------
# fast SPD path


@pytest.mark.parametrize("dim,J", [(1, 16), (2, 4)])
def test_fast_path_matches_generic_eigensolve(dim, J):
    params = MethodParams(0.7, 1.8, 0.4)
    cfg = DiscretizationConfig(J, 1.8, DIR, dim)
    fast = spectrum.two_level_error_eigenvalues(cfg, params)
    ops = build_two_level(cfg, params)
    dense = spectrum.eigenvalues_dense(error_matrix(ops))
    assert lfa.multiset_deviation(fast, dense) < 1e-8


def test_fast_path_periodic_falls_back():
    params = MethodParams(0.7, 1.8, 0.4)
    cfg = DiscretizationConfig(8, 1.8, PER, 1)
    eigs = spectrum.two_level_error_eigenvalues(cfg, params)
    ops = build_two_level(cfg, params)
    dense = spectrum.eigenvalues_dense(error_matrix(ops))
    assert lfa.multiset_deviation(eigs, dense) < 1e-10
