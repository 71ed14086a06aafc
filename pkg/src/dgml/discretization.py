"""SIPG discretization of the Poisson equation on uniform 1D/2D meshes.

The 1D mesh covers the unit interval with J cells of width h = 1/J.  Each
cell carries two degrees of freedom, the solution values at its left and
right endpoints (DG solutions are discontinuous across nodes, so interior
nodes host two values, one from each adjacent cell).

Dof layout used throughout the package (0-based index i, n = 2J):

    i = 2m      value at the left end of cell m   (trace right of node m)
    i = 2m + 1  value at the right end of cell m  (trace left of node m+1)

so the vector walks the interval left to right, cell by cell, and interior
node m hosts the adjacent pair (i = 2m-1, i = 2m).  The interior stencil of
the system matrix, in units of 1/h^2, is

    row 2m   : -1/2 @ 2m-2,  (1-delta0) @ 2m-1,  delta0 @ 2m,  -1/2 @ 2m+2
    row 2m+1 : -1/2 @ 2m-1,  delta0 @ 2m+1,  (1-delta0) @ 2m+2,  -1/2 @ 2m+3

i.e. the penalty delta0 sits on the diagonal, (1-delta0) couples the two
traces that meet at a shared node, and -1/2 couples same-side traces at
adjacent nodes.  Periodic boundary conditions wrap the stencil cyclically
(indices mod 2J).

Dirichlet boundary conditions are imposed weakly at the two boundary faces:
stencil couplings that would reach a ghost trace outside the interval are
dropped and the boundary-face penalty doubles the two corner diagonal
entries.  The resulting first and last 2x2 diagonal blocks are, in units
of 1/h^2,

    [[2*delta0, 0],            [[delta0, 0],
     [0,        delta0]]  and   [0,      2*delta0]],

the first off-stencil coupling being -1/2 from row 0 to row 2 (mirrored at
the right end).  This closure keeps the matrix symmetric positive
definite; it is a documented choice, and only the periodic operator is
used for exact Fourier verification.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_DENSE_CAP = 4096


class BoundaryCondition(Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


class OperatorRole(Enum):
    SYSTEM = "system"
    PROLONGATION = "prolongation"
    RESTRICTION = "restriction"
    COARSE = "coarse"
    SMOOTHER = "smoother"
    ERROR = "error"
    PRECONDITIONED = "preconditioned"


class ConfigError(ValueError):
    """Invalid discretization or method configuration."""


class SizeCapError(ValueError):
    """Requested dense operator exceeds the configured size cap."""


def dense_cap() -> int:
    """Row cap for dense operators; override with env var DGML_DENSE_CAP."""
    return int(os.environ.get("DGML_DENSE_CAP", DEFAULT_DENSE_CAP))


@dataclass(frozen=True)
class DiscretizationConfig:
    """Mesh size J, jump penalty, boundary condition and spatial dimension."""

    cells_per_dim: int
    penalty: float = 2.0
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET
    dim: int = 1

    def __post_init__(self):
        if self.cells_per_dim < 2 or self.cells_per_dim % 2 != 0:
            raise ConfigError(
                f"cells_per_dim must be even and >= 2 (coarsening by 2), "
                f"got {self.cells_per_dim}"
            )
        if not self.penalty > 1.0:
            raise ConfigError(f"penalty must exceed 1, got {self.penalty}")
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")

    @property
    def mesh_size(self) -> float:
        return 1.0 / self.cells_per_dim

    @property
    def ndof(self) -> int:
        n = 2 * self.cells_per_dim
        return n if self.dim == 1 else n * n

    def with_dim(self, dim: int) -> "DiscretizationConfig":
        return DiscretizationConfig(self.cells_per_dim, self.penalty, self.bc, dim)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator with a role tag (system, transfer, error, ...)."""

    entries: np.ndarray
    role: OperatorRole

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def as_array(op) -> np.ndarray:
    """Accept OperatorMatrix or a plain array."""
    return op.entries if isinstance(op, OperatorMatrix) else np.asarray(op)


def assemble_1d(config: DiscretizationConfig) -> OperatorMatrix:
    """Assemble the 1D SIPG system matrix for -u'' on the unit interval."""
    if config.dim != 1:
        raise ConfigError("assemble_1d requires dim=1")
    J = config.cells_per_dim
    delta0 = config.penalty
    n = 2 * J
    periodic = config.bc is BoundaryCondition.PERIODIC
    A = np.zeros((n, n))
    for i in range(n):
        # the trace sharing a node with dof i: node pairs are (2m-1, 2m)
        partner = i - 1 if i % 2 == 0 else i + 1
        for j, v in ((i, delta0), (partner, 1.0 - delta0), (i - 2, -0.5), (i + 2, -0.5)):
            if periodic:
                A[i, j % n] += v
            elif 0 <= j < n:
                A[i, j] += v
    if not periodic:
        # boundary-face penalty doubles the two corner entries
        A[0, 0] += delta0
        A[n - 1, n - 1] += delta0
    A *= float(J) ** 2  # 1/h^2
    return OperatorMatrix(A, OperatorRole.SYSTEM)


def assemble_2d(config: DiscretizationConfig) -> OperatorMatrix:
    """Assemble the 2D operator as the Kronecker sum A (x) I + I (x) A."""
    if config.dim != 2:
        raise ConfigError("assemble_2d requires dim=2")
    n1 = 2 * config.cells_per_dim
    if n1 * n1 > dense_cap():
        raise SizeCapError(
            f"2D operator has {n1 * n1} rows, exceeding the dense cap "
            f"{dense_cap()} (set DGML_DENSE_CAP to raise it)"
        )
    A1 = assemble_1d(config.with_dim(1)).entries
    eye = np.eye(n1)
    A2 = np.kron(A1, eye) + np.kron(eye, A1)
    return OperatorMatrix(A2, OperatorRole.SYSTEM)


def assemble(config: DiscretizationConfig) -> OperatorMatrix:
    """Assemble the system matrix for either spatial dimension."""
    return assemble_1d(config) if config.dim == 1 else assemble_2d(config)


def source_vector(config: DiscretizationConfig) -> np.ndarray:
    """Load vector for the constant source f = 1 (all-ones at this scaling)."""
    return np.ones(config.ndof)
