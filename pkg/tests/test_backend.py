import numpy as np
import pytest

from rfpls import BACKEND, make_bspline_basis
from rfpls import _fallback

kernels = pytest.importorskip("rfpls._kernels")


def test_backend_reported():
    assert BACKEND in ("cython", "python")


@pytest.mark.parametrize("order", [1, 2, 4, 6])
def test_bspline_design_parity(order):
    b = make_bspline_basis(order + 8, order, (-1.0, 2.0))
    x = np.r_[np.linspace(-1, 2, 301), b.interior_knots]
    assert np.allclose(kernels.bspline_design(x, b.knots, order),
                       _fallback.bspline_design(x, b.knots, order), rtol=0, atol=1e-14)


def test_weiszfeld_parity(rng):
    X = rng.standard_normal((200, 4))
    X[:20] = X[0]  # coincident rows exercise the Vardi-Zhang step
    m0 = X.mean(0)
    a = kernels.weiszfeld(X, m0, 1e-10, 500)
    b = _fallback.weiszfeld(X, m0, 1e-10, 500)
    assert np.allclose(a[0], b[0], atol=1e-10) and a[1] == b[1]


def test_kde_parity(rng):
    R = rng.standard_normal((150, 5))
    h = np.array([0.3, 0.5, 1.0, 2.0, 0.1])
    assert np.allclose(kernels.kde_columns(R, h), _fallback.kde_columns(R, h), rtol=1e-13, atol=0)


def test_pure_python_switch():
    import subprocess
    import sys

    code = "import rfpls; print(rfpls.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"RFPLS_PURE_PYTHON": "1", "PATH": ""})
    assert out.stdout.strip() == "python"
