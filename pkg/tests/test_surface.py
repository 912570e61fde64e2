import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruled_laplace.surface import (
    FrameError,
    FramePoint,
    InvariantTriple,
    RuledSurface,
    TorsalRulingError,
    integrate_frame,
    patch_point,
    recover_invariants,
)


def triple(kappa, delta, lam, interval=(0.0, 1.0), **consts):
    return InvariantTriple.from_strings(kappa, delta, lam, interval, consts)


HELICOID = triple("0", "1", "0", (0.0, 2.0))


def expm(a: np.ndarray, terms: int = 60) -> np.ndarray:
    """Matrix exponential by its power series; plenty for |a| ~ 1."""
    out, term = np.eye(len(a)), np.eye(len(a))
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def frame_at_node(frames, u):
    i = int(np.argmin([abs(f.u - u) for f in frames]))
    assert abs(frames[i].u - u) < 1e-12
    return frames[i]


# --- integration ------------------------------------------------------------------


def test_helicoid_closed_form():
    f = frame_at_node(integrate_frame(HELICOID), 1.0)
    c, s = math.cos(1.0), math.sin(1.0)
    np.testing.assert_allclose(f.e, [c, s, 0], atol=1e-8)
    np.testing.assert_allclose(f.n, [-s, c, 0], atol=1e-8)
    np.testing.assert_allclose(f.z, [0, 0, 1], atol=1e-8)
    np.testing.assert_allclose(f.s, [0, 0, 1.0], atol=1e-8)


def test_constant_coefficients_match_matrix_exponential():
    k, d, lam = 0.7, 1.3, -0.4
    frames = integrate_frame(triple(str(k), str(d), str(lam), (0.0, 1.0)))
    # rows (e, n, z, s) satisfy Y' = M Y
    m = np.array(
        [[0, 1, 0, 0], [-1, 0, k, 0], [0, -k, 0, 0], [d * lam, 0, d, 0]], dtype=float
    )
    y0 = np.vstack([np.eye(3), np.zeros(3)])
    expect = expm(m * 1.0) @ y0
    f = frames[-1]
    assert f.u == 1.0
    np.testing.assert_allclose(np.vstack([f.e, f.n, f.z, f.s]), expect, atol=1e-10)


@pytest.mark.parametrize("kappa", ["0", "1.7", "2*sin(3*u)", "u^2 - 1"])
def test_orthonormality_at_every_node(kappa):
    for f in integrate_frame(triple(kappa, "1 + 0.5*u", "cos(u)", (0.0, 2.0))):
        assert f.orthonormality_error() <= 1e-9
        assert abs(f.e @ f.n) <= 1e-9
        assert np.linalg.det(f.matrix()) > 0


def test_striction_property_on_nodes():
    frames = integrate_frame(triple("0.8*cos(u)", "1.5 + sin(u)", "u", (0.0, 1.0)))
    h = frames[1].u - frames[0].u
    E = np.array([f.e for f in frames])
    S = np.array([f.s for f in frames])
    de = (E[:-4] - 8 * E[1:-3] + 8 * E[3:-1] - E[4:]) / (12 * h)
    ds = (S[:-4] - 8 * S[1:-3] + 8 * S[3:-1] - S[4:]) / (12 * h)
    assert np.max(np.abs(np.einsum("ij,ij->i", ds, de))) <= 1e-8


def test_interior_start_integrates_both_ways():
    inv = triple("0", "1", "0", (-1.0, 1.0))
    frames = integrate_frame(inv, u0=0.0)
    assert frames[0].u == -1.0 and frames[-1].u == 1.0
    f = frame_at_node(frames, -0.5)
    np.testing.assert_allclose(f.e, [math.cos(0.5), -math.sin(0.5), 0], atol=1e-8)


def test_step_divides_span():
    frames = integrate_frame(triple("0", "1", "0", (0.0, 0.35)), step=0.1)
    np.testing.assert_allclose([f.u for f in frames], [0.0, 0.0875, 0.175, 0.2625, 0.35])


def test_torsal_ruling_is_rejected():
    with pytest.raises(TorsalRulingError):
        integrate_frame(triple("0", "u - 0.5", "0"))


def test_left_handed_initial_frame_is_rejected():
    bad = FramePoint(0.0, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, -1.0]), np.zeros(3))
    with pytest.raises(FrameError):
        integrate_frame(HELICOID, frame0=bad)


def test_off_grid_frame_agrees_with_refined_integration():
    inv = triple("1 + u", "2 - u", "0.3", (0.0, 1.0))
    coarse = RuledSurface(inv, step=1e-2)
    u = 0.4567
    fine = RuledSurface(triple("1 + u", "2 - u", "0.3", (0.0, u)), step=1e-4).frames[-1]
    f = coarse.frame_at(u)
    np.testing.assert_allclose(f.e, fine.e, atol=1e-8)
    np.testing.assert_allclose(f.s, fine.s, atol=1e-8)


# --- patch point ----------------------------------------------------------------


def test_helicoid_patch_values():
    surf = RuledSurface(HELICOID)
    p = surf.point(0.0, 1.0)
    np.testing.assert_allclose(p.x, [1, 0, 0], atol=1e-15)
    assert p.w == pytest.approx(math.sqrt(2))
    assert p.K == pytest.approx(-0.25)
    p0 = surf.point(0.0, 0.0)
    assert (p0.h11, p0.h12, p0.h22) == (0.0, 1.0, 0.0)


@pytest.mark.parametrize("delta, sign", [("2 - u", 1.0), ("-2 + u", -1.0)])
def test_striction_line_normal(delta, sign):
    # at v = 0 the normal is (sign delta) n and w = |delta|
    surf = RuledSurface(triple("0.5", delta, "1", (0.0, 1.0)))
    p = surf.point(0.3, 0.0)
    np.testing.assert_array_equal(p.xi, sign * surf.frame_at(0.3).n)
    assert p.w == pytest.approx(1.7)


def test_second_fundamental_form_by_differences():
    inv = triple("0.6 + 0.2*u", "1.2 + 0.3*sin(u)", "0.5 - u", (0.0, 1.0))
    surf = RuledSurface(inv)
    u, v, h = 0.5, 0.7, 1e-4

    def x(a, b):
        return surf.point(a, b, anchor=u).x

    x_uu = (x(u + h, v) - 2 * x(u, v) + x(u - h, v)) / h**2
    x_uv = (x(u + h, v + h) - x(u + h, v - h) - x(u - h, v + h) + x(u - h, v - h)) / (4 * h * h)
    x_vv = (x(u, v + h) - 2 * x(u, v) + x(u, v - h)) / h**2
    p = surf.point(u, v)
    assert p.h11 == pytest.approx(x_uu @ p.xi, abs=1e-6)
    assert p.h12 == pytest.approx(x_uv @ p.xi, abs=1e-6)
    assert abs(x_vv @ p.xi) <= 1e-6
    # K = det h / det I from raw partials
    g = np.array([[p.x_u @ p.x_u, p.x_u @ p.x_v], [p.x_v @ p.x_u, p.x_v @ p.x_v]])
    K = (p.h11 * p.h22 - p.h12**2) / np.linalg.det(g)
    assert K == pytest.approx(p.K, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(
    k=st.floats(-2, 2),
    d=st.floats(0.2, 3).flatmap(lambda a: st.sampled_from([a, -a])),
    d1=st.floats(-1, 1),
    lam=st.floats(-2, 2),
    v=st.floats(-5, 5),
)
def test_patch_point_invariants(k, d, d1, lam, v):
    inv = triple(f"{k!r}", f"{d!r} + {d1!r}*u", f"{lam!r}", (0.0, 0.1))
    p = patch_point(inv, FramePoint.standard(), v)
    assert p.K < 0
    assert np.linalg.norm(p.xi) == pytest.approx(1.0, abs=1e-14)
    assert abs(p.xi @ p.x_u) <= 1e-12 * (1 + np.linalg.norm(p.x_u))
    assert abs(p.xi @ p.x_v) <= 1e-14
    assert p.h22 == 0.0


# --- invariant recovery ------------------------------------------------------------


def test_recover_constant_invariants():
    rec = recover_invariants(integrate_frame(triple("0.5", "2", "1")))
    assert np.max(np.abs(rec.kappa - 0.5)) <= 1e-4
    assert np.max(np.abs(rec.delta - 2)) <= 1e-4
    assert np.max(np.abs(rec.lam - 1)) <= 1e-4


def test_recover_helicoid():
    rec = recover_invariants(integrate_frame(HELICOID))
    assert np.max(np.abs(rec.kappa)) <= 1e-4
    assert np.max(np.abs(rec.delta - 1)) <= 1e-4
    assert np.max(np.abs(rec.lam)) <= 1e-4


@settings(max_examples=10, deadline=None)
@given(
    a=st.floats(-1, 1),
    b=st.floats(-1, 1),
    c=st.floats(0.5, 2),
    d=st.floats(-0.4, 0.4),
    e=st.floats(-1, 1),
)
def test_round_trip_random_invariants(a, b, c, d, e):
    inv = triple(f"{a!r} + {b!r}*sin(2*u)", f"{c!r}*(1 + {d!r}*cos(u))", f"{e!r} + u^2", (0.0, 1.0))
    rec = recover_invariants(integrate_frame(inv, step=1e-3))
    for i, u in enumerate(rec.u):
        k, dd, lam = inv.values(u)
        assert abs(rec.kappa[i] - k) <= 1e-4
        assert abs(rec.delta[i] - dd) <= 1e-4
        assert abs(rec.lam[i] - lam) <= 1e-4


def test_recover_rejects_reversed_frame():
    frames = integrate_frame(HELICOID, step=0.1)[:6]
    f = frames[3]
    frames[3] = FramePoint(f.u, f.e, f.n, -f.z, f.s)
    with pytest.raises(FrameError):
        recover_invariants(frames)


def test_recover_needs_five_frames():
    with pytest.raises(FrameError):
        recover_invariants(integrate_frame(HELICOID, step=0.1)[:4])


def test_recover_needs_uniform_grid():
    frames = integrate_frame(HELICOID, step=0.1)
    with pytest.raises(FrameError):
        recover_invariants(frames[:5] + frames[6:9])


# --- invariant triple --------------------------------------------------------------


def test_striction_angle_and_epsilon():
    inv = triple("0", "-2", "u", (0.0, 2.0))
    assert inv.striction_angle(0.0) == pytest.approx(math.pi / 2)
    assert inv.striction_angle(1.0) == pytest.approx(math.pi / 4)
    assert 1.0 / math.tan(inv.striction_angle(1.5)) == pytest.approx(1.5)
    assert inv.epsilon(0.5) == -1.0


def test_invariants_may_only_use_u():
    with pytest.raises(ValueError):
        triple("v", "1", "0")
