"""Laplace normal image of a non-conoidal ruled surface with q = f(u)/w.

The image is again a ruled surface with the same rulings and Kruppa frame.
With g = f/delta its directrix is r* = g n, its striction line is
s* = g n - g' e, and its invariants are

    delta* = kappa g,   kappa* = kappa,   lambda* = -(g'' + g) / (kappa g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expr import ZERO_TOL, Expression, Jet3, eval_jet3
from .laplace import laplace_field
from .relnorm import SupportField
from .surface import FramePoint, InvariantSamples, InvariantTriple, RuledSurface, recover_invariants


class ConoidalError(ValueError):
    """kappa vanishes: the image degenerates and is not a ruled surface."""


@dataclass(frozen=True)
class ImageInvariants:
    delta_star: float
    kappa_star: float
    lambda_star: float


@dataclass(frozen=True, eq=False)
class ImageFramePoint:
    u: float
    r_star: np.ndarray
    s_star: np.ndarray
    ruling: np.ndarray


def _ratio_jet(inv: InvariantTriple, f: Expression, u: float) -> tuple[float, Jet3, Jet3]:
    kj, dj, _ = inv.jets(u)
    fj = eval_jet3(f, u, inv.constants)
    if abs(fj.value) <= ZERO_TOL:
        raise ValueError(f"f({u!r}) vanishes")
    return kj.value, fj, fj / dj


def image_surface(
    inv: InvariantTriple, f: Expression, frame: FramePoint
) -> tuple[ImageFramePoint, ImageInvariants]:
    k, _, g = _ratio_jet(inv, f, frame.u)
    if abs(k) <= ZERO_TOL:
        raise ConoidalError(f"kappa({frame.u!r}) = 0: the image is not a ruled surface")
    r_star = g.value * frame.n
    s_star = r_star - g.d1 * frame.e
    pt = ImageFramePoint(frame.u, r_star, s_star, frame.e.copy())
    invariants = ImageInvariants(
        delta_star=k * g.value,
        kappa_star=k,
        lambda_star=-(g.d2 + g.value) / (k * g.value),
    )
    return pt, invariants


def striction_tangent_frame(inv: InvariantTriple, f: Expression, u: float) -> tuple[float, float, float]:
    """Frame components of s*' = -(g'' + g) e + kappa g z."""
    k, _, g = _ratio_jet(inv, f, u)
    return -(g.d2 + g.value), 0.0, k * g.value


def image_frames(surface: RuledSurface, f: Expression) -> list[FramePoint]:
    """Frames of the image surface on the integration nodes: shared (e, n, z), striction s*."""
    out = []
    for fr in surface.frames:
        pt, _ = image_surface(surface.inv, f, fr)
        out.append(FramePoint(fr.u, fr.e, fr.n, fr.z, pt.s_star))
    return out


def reconstructed_invariants(surface: RuledSurface, f: Expression) -> InvariantSamples:
    return recover_invariants(image_frames(surface, f))


def image_point(surface: RuledSurface, f: Expression, u: float, v: float) -> np.ndarray:
    """Point of the image surface corresponding to (u, v) of the original patch."""
    q = SupportField("conoidal", f, surface.inv.constants)
    return laplace_field(surface.point(u, v), surface.frame_at(u), surface.inv, q).L


@dataclass
class Segment:
    u_start: float
    u_end: float
    sign: float
    delta_star: tuple[float, float]
    kappa_star: tuple[float, float]
    lambda_star: tuple[float, float]


def segment_invariants(inv: InvariantTriple, f: Expression, us) -> list[Segment]:
    """Split ``us`` where delta* changes sign or vanishes; report (min, max) per segment."""
    segments: list[Segment] = []
    current: list = []

    def close():
        if current:
            arr = np.array([c[1:] for c in current])
            segments.append(
                Segment(
                    current[0][0],
                    current[-1][0],
                    math.copysign(1.0, arr[0, 0]),
                    (float(arr[:, 0].min()), float(arr[:, 0].max())),
                    (float(arr[:, 1].min()), float(arr[:, 1].max())),
                    (float(arr[:, 2].min()), float(arr[:, 2].max())),
                )
            )
            current.clear()

    for u in us:
        k = inv.values(u)[0]
        g = eval_jet3(f, u, inv.constants) / inv.jets(u)[1]
        ds = k * g.value
        if abs(ds) <= ZERO_TOL:
            close()
            continue
        if current and math.copysign(1.0, ds) != math.copysign(1.0, current[-1][1]):
            close()
        current.append((float(u), ds, k, -(g.d2 + g.value) / ds))
    close()
    return segments


# --- property checks on the image surface -------------------------------------------


def _applicable(inv: InvariantTriple, f: Expression, us) -> None:
    for u in us:
        k, _, _ = _ratio_jet(inv, f, u)
        if abs(k) <= ZERO_TOL:
            raise ConoidalError(f"kappa({u!r}) = 0")


@dataclass
class Prop4Report:
    u: np.ndarray
    parallel: np.ndarray
    orthogonal: np.ndarray
    parallel_condition: np.ndarray
    orthogonal_condition: np.ndarray
    parallel_residual: np.ndarray
    orthogonal_residual: np.ndarray
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def check_prop4(surface: RuledSurface, f: Expression, us=None, tol: float = 1e-8) -> Prop4Report:
    """Striction-line tangent of the surface vs tangent of the image directrix."""
    inv = surface.inv
    us = np.asarray(us if us is not None else surface.nodes, dtype=float)
    _applicable(inv, f, us)
    gs = [_ratio_jet(inv, f, u)[2] for u in us]
    g_scale = max(abs(g.value) for g in gs)
    par, orth, par_c, orth_c, par_r, orth_r = [], [], [], [], [], []
    for u, g in zip(us, gs):
        k, d, lam = inv.values(u)
        # frame components (e, n, z)
        s_t = np.array([d * lam, 0.0, d])
        r_t = np.array([-g.value, g.d1, k * g.value])
        ns, nr = np.linalg.norm(s_t), np.linalg.norm(r_t)
        if ns == 0.0 or nr == 0.0:
            raise ArithmeticError(f"zero tangent at u={u}")
        sin_a = np.linalg.norm(np.cross(s_t, r_t)) / (ns * nr)
        cos_a = abs(s_t @ r_t) / (ns * nr)
        par_r.append(sin_a)
        orth_r.append(cos_a)
        par.append(sin_a <= tol)
        orth.append(cos_a <= tol)
        par_c.append(abs(g.d1) <= tol * g_scale and abs(k * lam + 1.0) <= tol * (1.0 + abs(k * lam)))
        orth_c.append(abs(k - lam) <= tol * (1.0 + abs(k) + abs(lam)))
    report = Prop4Report(
        us,
        np.array(par),
        np.array(orth),
        np.array(par_c),
        np.array(orth_c),
        np.array(par_r),
        np.array(orth_r),
    )
    for name, a, b in (("parallel", par, par_c), ("orthogonal", orth, orth_c)):
        for u, x, y in zip(us, a, b):
            if x != y:
                report.mismatches.append(f"{name} at u={u:.12g}: geometric={x} condition={y}")
    return report


@dataclass
class Prop5Report:
    coincide: bool
    condition: bool
    distance: float
    ratio_derivative: float

    @property
    def ok(self) -> bool:
        return self.coincide == self.condition


def check_prop5(surface: RuledSurface, f: Expression, us=None, tol: float = 1e-9) -> Prop5Report:
    """Directrix r* equals striction line s* iff f/delta is constant."""
    inv = surface.inv
    us = np.asarray(us if us is not None else surface.nodes, dtype=float)
    dist, scale, dg = 0.0, 0.0, 0.0
    for u in us:
        pt, _ = image_surface(inv, f, surface.frame_at(u))
        dist = max(dist, float(np.linalg.norm(pt.r_star - pt.s_star)))
        scale = max(scale, float(np.linalg.norm(pt.r_star)))
        dg = max(dg, abs(_ratio_jet(inv, f, u)[2].d1))
    return Prop5Report(dist <= tol * scale, dg <= tol * scale, dist / scale, dg / scale)


PROP6_FIELDS = (
    "normals-parallel",
    "orthoid",
    "striction-asymptotic",
    "striction-curvature-line",
    "congruent",
    "edlinger",
)


@dataclass
class PropCheck:
    name: str
    closed_form: bool
    closed_residual: float
    geometric: bool
    geometric_residual: float

    @property
    def agree(self) -> bool:
        return self.closed_form == self.geometric

    @property
    def holds(self) -> bool:
        return self.closed_form and self.geometric


@dataclass
class Prop6Report:
    checks: dict

    @property
    def mismatches(self) -> list:
        return [name for name, c in self.checks.items() if not c.agree]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __getitem__(self, name: str) -> PropCheck:
        return self.checks[name]


def _fit_residual(basis: np.ndarray, values: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(basis, values, rcond=None)
    return float(np.max(np.abs(basis @ coef - values)) / np.max(np.abs(values)))


def _spread(values: np.ndarray) -> float:
    return float((values.max() - values.min()) / np.max(np.abs(values)))


def check_prop6(
    surface: RuledSurface,
    f: Expression,
    tol_closed: float = 1e-8,
    tol_geometric: float = 1e-4,
    v_samples=(-1.0, -0.3, 0.4, 1.2),
) -> Prop6Report:
    """Decide the six image-surface properties by two independent routes.

    The closed-form route tests the stated shape of q, kappa, delta (least-squares
    fits of f/delta against the named function families, plus the ODE of the
    asymptotic-line case).  The geometric route reconstructs the image surface
    from sampled striction points and reads the properties off its recovered
    invariants and normals.
    """
    inv = surface.inv
    rec = reconstructed_invariants(surface, f)
    us = rec.u
    _applicable(inv, f, us)
    consts = inv.constants

    kap, dlt, lam, fv, g, g2, d_k2 = [], [], [], [], [], [], []
    for u in us:
        kj, dj, lj = inv.jets(u)
        fj = eval_jet3(f, u, consts)
        gj = fj / dj
        dk = dj / kj
        kap.append(kj.value)
        dlt.append(dj.value)
        lam.append(lj.value)
        fv.append(fj.value)
        g.append(gj.value)
        g2.append(gj.d2)
        d_k2.append(dk.d2)
    kap, dlt, lam, fv, g, g2, d_k2 = map(np.array, (kap, dlt, lam, fv, g, g2, d_k2))
    ones = np.ones_like(us)

    closed = {}
    closed["normals-parallel"] = _spread(fv / np.sqrt(np.abs(dlt)))
    closed["orthoid"] = _fit_residual(np.column_stack([np.cos(us), np.sin(us)]), g)
    scale55 = np.max(np.abs(dlt * g2) + np.abs(fv) * (kap**2 + 1.0))
    closed["striction-asymptotic"] = float(np.max(np.abs(dlt * g2 + fv * (kap**2 + 1.0))) / scale55)
    closed["striction-curvature-line"] = _fit_residual(np.column_stack([ones, us]), g)
    lam_congruent = -d_k2 / dlt - 1.0 / kap
    closed["congruent"] = max(
        float(np.max(np.abs(fv - dlt**2 / kap)) / np.max(np.abs(fv))),
        float(np.max(np.abs(lam - lam_congruent)) / (1.0 + np.max(np.abs(lam)))),
    )
    closed["edlinger"] = max(closed["striction-curvature-line"], _spread(kap * g))

    ds, ks, ls = rec.delta, rec.kappa, rec.lam
    geo = {}
    q = SupportField("conoidal", f, consts)
    cross = 0.0
    for u in us[:: max(1, len(us) // 25)]:
        for v in v_samples:
            pt = surface.point(u, v)
            smp = laplace_field(pt, surface.frame_at(u), inv, q)
            nstar = np.cross(smp.L_u, smp.L_v)
            cross = max(cross, float(np.linalg.norm(np.cross(pt.xi, nstar / np.linalg.norm(nstar)))))
    geo["normals-parallel"] = cross
    geo["orthoid"] = float(np.max(np.abs(ls)) / (1.0 + np.max(np.abs(ks))))
    geo["striction-asymptotic"] = float(np.max(np.abs(ks - ls)) / (1.0 + np.max(np.abs(ks))))
    geo["striction-curvature-line"] = float(np.max(np.abs(1.0 + ks * ls)))
    geo["congruent"] = max(
        float(np.max(np.abs(ds - dlt)) / np.max(np.abs(dlt))),
        float(np.max(np.abs(ks - kap)) / (1.0 + np.max(np.abs(kap)))),
        float(np.max(np.abs(ls - lam)) / (1.0 + np.max(np.abs(lam)))),
    )
    geo["edlinger"] = max(_spread(ds), geo["striction-curvature-line"])

    checks = {
        name: PropCheck(
            name,
            closed[name] <= tol_closed,
            closed[name],
            geo[name] <= tol_geometric,
            geo[name],
        )
        for name in PROP6_FIELDS
    }
    return Prop6Report(checks)
