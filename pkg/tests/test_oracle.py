import math

import numpy as np
import pytest

from ruled_laplace.laplace import sample
from ruled_laplace.oracle import (
    OracleConfig,
    StencilError,
    diameter,
    fit_line,
    fit_plane,
    laplacian_oracle,
    numerical_rank,
)
from ruled_laplace.relnorm import SupportField
from ruled_laplace.surface import InvariantTriple, RuledSurface

HELICOID = RuledSurface(InvariantTriple.from_strings("0", "1", "0", (-1.0, 1.0)), u0=0.0)


def surface(kappa, delta, lam, interval=(0.0, 1.0)):
    return RuledSurface(InvariantTriple.from_strings(kappa, delta, lam, interval))


def test_helicoid_reciprocal_w():
    L = laplacian_oracle(HELICOID, SupportField.general("1/w"), 0.0, 0.5)
    np.testing.assert_allclose(L, [0, 1, 0], atol=1e-5)


def test_helicoid_equiaffine():
    L = laplacian_oracle(HELICOID, SupportField.general("w^(-0.5)"), 0.0, 1.0)
    np.testing.assert_allclose(L, [0, 2**0.25, 0], atol=1e-5)


@pytest.mark.parametrize(
    "kappa, delta, lam, q",
    [
        ("0.7", "1.2 + 0.3*sin(u)", "0.4*u", "(1 + 0.2*u*v)*w^(-0.5)"),
        ("-0.5 + u", "-1.5 + 0.2*u^2", "1", "exp(0.3*v) + 0.1*u"),
        ("2*cos(u)", "0.8", "-0.3", "cos(u)/w + 0.1*v^2"),
    ],
)
def test_agrees_with_closed_form(kappa, delta, lam, q):
    surf = surface(kappa, delta, lam)
    support = SupportField.general(q)
    for u, v in [(0.3, -0.7), (0.5, 0.0), (0.7, 1.4)]:
        L = sample(surf, support, u, v).L
        rich = laplacian_oracle(surf, support, u, v)
        plain = laplacian_oracle(surf, support, u, v, OracleConfig(richardson=False))
        assert np.linalg.norm(rich - L) <= 1e-6 * (1 + np.linalg.norm(L))
        assert np.linalg.norm(plain - L) <= 1e-4 * (1 + np.linalg.norm(L))
        assert abs(rich @ surf.frame_at(u).z) <= 1e-5


def test_stencil_must_stay_inside():
    surf = surface("0", "1", "0")
    with pytest.raises(StencilError):
        laplacian_oracle(surf, SupportField.general("1/w"), 0.0002, 0.0)
    # without Richardson the reach halves
    laplacian_oracle(surf, SupportField.general("1/w"), 0.0005, 0.0, OracleConfig(richardson=False))


def test_step_must_be_positive():
    with pytest.raises(ValueError):
        OracleConfig(fd_step=0.0)


# --- rank and fits -----------------------------------------------------------------


@pytest.mark.parametrize(
    "cols, rank",
    [
        ([(1, 0, 0), (0, 1, 0)], 2),
        ([(1, 0, 0), (2, 0, 0)], 1),
        ([(0, 0, 0), (0, 0, 0)], 0),
        ([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)], 3),
        ([(1, 0, 0), (1, 1e-9, 0)], 1),
    ],
)
def test_numerical_rank(cols, rank):
    assert numerical_rank(cols, 1e-6) == rank


def test_numerical_rank_column_count():
    with pytest.raises(ValueError):
        numerical_rank([], 1e-6)
    with pytest.raises(ValueError):
        numerical_rank([(1, 0, 0)] * 5, 1e-6)


def test_collinear_points():
    res, d = fit_line([(0, 0, 0), (1, 2, 3), (2, 4, 6)])
    assert res == pytest.approx(0.0, abs=1e-15)
    assert abs(abs(d @ np.array([1, 2, 3]) / math.sqrt(14)) - 1) <= 1e-12


def test_unit_circle_fits():
    t = np.linspace(0, 2, 30)
    pts = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
    line_res, _ = fit_line(pts)
    plane_res, normal = fit_plane(pts)
    assert line_res > 0.1
    assert plane_res <= 1e-10
    assert abs(abs(normal[2]) - 1) <= 1e-12


def test_coincident_samples():
    assert fit_line([(1, 2, 3)] * 4) == (0.0, None)
    assert fit_plane([(1, 2, 3)] * 4) == (0.0, None)
    assert diameter([(1, 2, 3)] * 4) == 0.0


def test_diameter():
    assert diameter([(0, 0, 0), (3, 4, 0), (1, 1, 0)]) == 5.0
