import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import CORPUS, random_irreducible, setup_for
from ssact import kernels

compiled = pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="extension not built")


@compiled
@pytest.mark.parametrize("name", CORPUS)
def test_census_backends_agree(name):
    cl = setup_for(name).cl
    for g in range(len(cl)):
        py = cl.fixed_path_census(g, 7, backend="python")
        cy = cl.fixed_path_census(g, 7, backend="cython")
        assert np.array_equal(py[0], cy[0]) and np.array_equal(py[1], cy[1])


@compiled
def test_power_iteration_backends_agree(rng):
    for _ in range(20):
        A = random_irreducible(rng).astype(float)
        B = np.ascontiguousarray(A + np.eye(len(A)))
        x0 = np.full(len(A), 1.0 / len(A))
        lp, xp, ip, okp = kernels.BACKENDS["python"].power_iterate(B, x0, 1e-12, 100000)
        lc, xc, ic, okc = kernels.BACKENDS["cython"].power_iterate(B, x0, 1e-12, 100000)
        assert okp and okc and ip == ic
        assert lp == pytest.approx(lc, rel=1e-14)
        np.testing.assert_allclose(xp, xc, rtol=1e-13)


def test_census_totals_count_all_paths(partial):
    counts, totals = partial.cl.fixed_path_census("c", 5)
    assert totals.tolist() == [2 ** k for k in range(6)]
    assert counts[5].sum() <= totals[5]


def test_fallback_selected_by_environment():
    env = dict(os.environ, SSACT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from ssact import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
