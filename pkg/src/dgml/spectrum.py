"""Dense eigenvalue computation and cluster analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import (
    BoundaryCondition,
    DiscretizationConfig,
    OperatorRole,
    as_array,
    dense_cap,
    SizeCapError,
)
from .twolevel import MethodParams, build_two_level, error_matrix


class EigensolveError(np.linalg.LinAlgError):
    """The dense eigensolver did not converge."""


@dataclass(frozen=True)
class Cluster:
    center: complex
    count: int
    radius: float


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    spectral_radius: float
    clusters: list[Cluster]
    operator_role: OperatorRole | None = None


def eigenvalues_dense(M) -> np.ndarray:
    """All eigenvalues of a dense (generally nonsymmetric) matrix."""
    A = as_array(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    if A.shape[0] > dense_cap():
        raise SizeCapError(
            f"{A.shape[0]} rows exceed the dense cap {dense_cap()} "
            "(set DGML_DENSE_CAP to raise it)"
        )
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolveError(f"eigensolver did not converge: {exc}") from exc


def cluster_eigenvalues(eigs, tol: float) -> list[Cluster]:
    """Single-linkage grouping with link distance tol.

    Eigenvalues are sorted by (real, imag) first, so the result does not
    depend on input order; clusters are returned sorted the same way.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    eigs = np.asarray(eigs, dtype=complex)
    n = eigs.size
    if n == 0:
        return []
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    dist = np.abs(eigs[:, None] - eigs[None, :])
    links = np.argwhere(dist <= tol)
    for i, j in links:
        if i < j:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for members in groups.values():
        vals = eigs[members]
        center = vals.mean()
        radius = float(np.max(np.abs(vals - center)))
        clusters.append(Cluster(complex(center), len(members), radius))
    clusters.sort(key=lambda cl: (cl.center.real, cl.center.imag))
    return clusters


def analyze(M_or_eigs, tol: float = 1e-6, role: OperatorRole | None = None) -> SpectrumReport:
    """Spectrum report (eigenvalues, radius, clusters) of a matrix or of an
    eigenvalue multiset."""
    arr = as_array(M_or_eigs)
    eigs = np.asarray(arr, dtype=complex).ravel() if arr.ndim == 1 else eigenvalues_dense(M_or_eigs)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    return SpectrumReport(eigs, radius, cluster_eigenvalues(eigs, tol), role)


def two_level_error_eigenvalues(config: DiscretizationConfig, params: MethodParams) -> np.ndarray:
    """Eigenvalue multiset of the two-level error operator.

    For a symmetric positive definite system (Dirichlet) the operator is
    similar, via the Cholesky factor, to a projected symmetric matrix; its
    nonzero spectrum is computed with a symmetric eigensolve on the
    complement of the coarse space and the known structural zeros are
    appended.  That path is exact (tests compare it entrywise against the
    generic dense eigensolve) and roughly an order of magnitude faster on
    the 2D meshes.  Singular (periodic) systems fall back to the generic
    dense path.
    """
    ops = build_two_level(config, params)
    n = ops.A.shape[0]
    if config.bc is BoundaryCondition.PERIODIC:
        return eigenvalues_dense(error_matrix(ops))
    if n > dense_cap():
        raise SizeCapError(f"{n} rows exceed the dense cap {dense_cap()}")
    # Dinv is a scalar matrix: (I - P (P^T A P)^{-1} P^T A)(I - ab * A)
    ab = params.alpha * ops.Dinv[0, 0]
    L = np.linalg.cholesky(ops.A)
    Y = L.T @ ops.P
    Q, _ = np.linalg.qr(Y, mode="complete")
    Z = Q[:, ops.P.shape[1]:]
    W = L @ Z
    T = np.eye(Z.shape[1]) - ab * (W.T @ W)
    nonzero = np.linalg.eigvalsh(T)
    return np.concatenate([nonzero, np.zeros(ops.P.shape[1])]).astype(complex)
