"""Shared fixtures: reference parameter triples resolved once per session."""

import numpy as np
import pytest

from dgml.twolevel import MethodParams


@pytest.fixture(scope="session")
def clustering_triple():
    """Independent reference for the clustering parameters: quartic roots
    via the numpy companion-matrix solver, selected by bracket."""
    c = [r.real for r in np.roots([4, -8, 8, -8, 3]) if abs(r.imag) < 1e-10 and 0 < r.real < 1]
    d = [r.real for r in np.roots([12, -32, 24, -4, -1]) if abs(r.imag) < 1e-10 and r.real > 1]
    a = [r.real for r in np.roots([183, -352, 214, -40, -1]) if abs(r.imag) < 1e-10 and 0 < r.real < 1]
    assert len(c) == len(d) == len(a) == 1
    return MethodParams(a[0], d[0], c[0])


@pytest.fixture(scope="session")
def classical_params():
    return MethodParams(8.0 / 9.0, 2.0, 0.5)
