"""Laplace normal field of a relatively normalized ruled surface.

In the Kruppa frame the Laplace normal is

    L = L1 e + L2 n,   L1 = w q (2 kappa v + delta') / (2 delta^2),   L2 = w q / delta

so it always lies on the asymptotic plane of its ruling.  Its partials come
from BiJet2 arithmetic plus the frame equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .expr import BiJet2, Expression, Jet3, eval_jet3, parse
from .oracle import diameter, fit_line, fit_plane, numerical_rank
from .relnorm import LocalJets, SupportField, local_jets
from .surface import FramePoint, InvariantTriple, RuledSurface, SurfacePoint


class DegenerateCurvatureError(ArithmeticError):
    """The denominator D of the curvature of Gamma vanishes."""


@dataclass(frozen=True, eq=False)
class LaplaceSample:
    u: float
    v: float
    L1: float
    L2: float
    L: np.ndarray
    L_u: np.ndarray
    L_v: np.ndarray
    L_u_frame: tuple[float, float, float]
    L_v_frame: tuple[float, float]


def laplace_components(J: LocalJets) -> tuple[BiJet2, BiJet2]:
    K, D, D1, V, W, Q = J
    L1 = W * Q * (2.0 * K * V + D1) / (2.0 * D * D)
    L2 = W * Q / D
    return L1, L2


def laplace_field(
    pt: SurfacePoint, frame: FramePoint, inv: InvariantTriple, q: SupportField
) -> LaplaceSample:
    J = local_jets(inv, q, pt.u, pt.v)
    L1, L2 = laplace_components(J)
    k = J.K.value
    u_frame = (L1.du - L2.value, L1.value + L2.du, k * L2.value)
    v_frame = (L1.dv, L2.dv)
    return LaplaceSample(
        u=pt.u,
        v=pt.v,
        L1=L1.value,
        L2=L2.value,
        L=frame.to_ambient(L1.value, L2.value),
        L_u=frame.to_ambient(*u_frame),
        L_v=frame.to_ambient(*v_frame),
        L_u_frame=u_frame,
        L_v_frame=v_frame,
    )


def sample(surface: RuledSurface, q: SupportField, u: float, v: float) -> LaplaceSample:
    frame = surface.frame_at(u)
    return laplace_field(surface.point(u, v), frame, surface.inv, q)


# --- classification -----------------------------------------------------------

VERDICTS = ("point", "straight-line", "planar-curve", "space-curve", "surface")


@dataclass
class ClassificationReport:
    verdict: str
    evidence: list = field(default_factory=list)  # (test-name, measured, threshold)
    gamma_samples: Optional[list] = None
    scale: float = 0.0

    def measured(self, name: str) -> float:
        for test, value, _ in self.evidence:
            if test == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class Tolerances:
    relative: float = 1e-6  # point / line / plane residuals and ruling-constancy
    rank: float = 1e-6


def line_delta_residual(delta: Jet3) -> float:
    """Relative residual of 2 delta delta'' - 3 delta'^2 - 4 delta^2."""
    d, d1, d2 = delta.value, delta.d1, delta.d2
    r = 2.0 * d * d2 - 3.0 * d1 * d1 - 4.0 * d * d
    return abs(r) / (abs(2.0 * d * d2) + 3.0 * d1 * d1 + 4.0 * d * d)


def classify_image(
    surface: Union[RuledSurface, InvariantTriple],
    q: SupportField,
    grid: tuple[Sequence[float], Sequence[float]],
    tolerances: Optional[Tolerances] = None,
) -> ClassificationReport:
    """Decide whether the Laplace normal image is a point, a line, a planar curve or 2-dimensional."""
    tol = tolerances or Tolerances()
    if isinstance(surface, InvariantTriple):
        surface = RuledSurface(surface)
    us, vs = np.asarray(grid[0], dtype=float), np.asarray(grid[1], dtype=float)
    if us.size < 2 or vs.size < 2:
        raise ValueError("degenerate grid: need at least 2 points per direction")

    samples = [[sample(surface, q, u, v) for v in vs] for u in us]
    L = np.array([[s.L for s in row] for row in samples])
    Lu = np.array([[s.L_u for s in row] for row in samples])
    Lv = np.array([[s.L_v for s in row] for row in samples])
    scale = float(np.max(np.linalg.norm(L, axis=-1)))
    # derivatives are measured against |L| too, so round-off on a constant image reads as rank 0
    dscale = float(max(np.max(np.linalg.norm(Lu, axis=-1)), np.max(np.linalg.norm(Lv, axis=-1)), scale))
    lv_rel = float(np.max(np.linalg.norm(Lv, axis=-1))) / scale
    ranks = [
        numerical_rank([a / dscale, b / dscale], tol.rank) if dscale > 0 else 0
        for a, b in zip(Lu.reshape(-1, 3), Lv.reshape(-1, 3))
    ]
    kappa_max = max(abs(surface.inv.values(u)[0]) for u in us)
    r_line = max(line_delta_residual(eval_jet3(surface.inv.delta, u, surface.inv.constants)) for u in us)
    evidence = [
        ("max_rank", float(max(ranks)), 1.0),
        ("ruling_variation", lv_rel, tol.relative),
        ("max_abs_kappa", kappa_max, 0.0),
        ("line_delta_residual", r_line, tol.relative),
    ]
    report = ClassificationReport("surface", evidence, None, scale)
    if max(ranks) >= 2:
        return report

    if lv_rel <= tol.relative:
        gamma = [sample(surface, q, u, 0.0).L for u in us]
    else:
        # rank 1 with L_v != 0: the image is still a curve, traced by the whole grid
        gamma = list(L.reshape(-1, 3))
    report.gamma_samples = [np.asarray(g) for g in gamma]
    diam = diameter(gamma) / scale
    line_res, _ = fit_line(gamma)
    plane_res, _ = fit_plane(gamma)
    evidence += [
        ("diameter", diam, tol.relative),
        ("line_residual", line_res, tol.relative),
        ("plane_residual", plane_res, tol.relative),
    ]
    if diam <= tol.relative:
        report.verdict = "point"
    elif line_res <= tol.relative:
        report.verdict = "straight-line"
    elif plane_res <= tol.relative:
        report.verdict = "planar-curve"
    else:
        report.verdict = "space-curve"
    return report


# --- curvature of Gamma -------------------------------------------------------


def curvature_coefficients(delta: Jet3) -> tuple[float, float, float]:
    d, d1, d2, d3 = delta.value, delta.d1, delta.d2, delta.d3
    A = d * d * (2.0 * d * d2 - 3.0 * d1 * d1 - 4.0 * d * d)
    B = 2.0 * d * (6.0 * d * d1 * d2 - 4.0 * d * d * d1 - 6.0 * d1**3 - d * d * d3)
    C = (
        4.0 * d**4
        + 7.0 * d * d * d1 * d1
        + 6.0 * d1**4
        - 2.0 * d**3 * d2
        - 6.0 * d * d1 * d1 * d2
        + d * d * d1 * d3
    )
    return A, B, C


def gamma_curvature_parts(delta: Jet3, f: Jet3) -> tuple[float, float]:
    """(numerator, D) with k = 2|delta|^3 * numerator / D."""
    A, B, C = curvature_coefficients(delta)
    d, d1, d2 = delta.value, delta.d1, delta.d2
    f0, f1, f2 = f.value, f.d1, f.d2
    num = A * f0 * f2 - 2.0 * A * f1 * f1 + B * f0 * f1 + C * f0 * f0
    inner = d * d * (d1 * f0 - 2.0 * d * f1) ** 2 + (
        2.0 * (d * d + d1 * d1) * f0 - d * (d1 * f1 + d2 * f0)
    ) ** 2
    return num, inner**1.5


def gamma_curvature(inv: InvariantTriple, f: Expression, u: float) -> float:
    """Unsigned curvature of Gamma(u) = (f/delta)(delta'/(2 delta) e + n) for a conoidal surface."""
    kj, dj, _ = inv.jets(u)
    if abs(kj.value) > 1e-12:
        raise ValueError(f"gamma_curvature needs kappa = 0, got {kj.value!r} at u={u}")
    fj = eval_jet3(f, u, inv.constants)
    num, D = gamma_curvature_parts(dj, fj)
    if not D > 0.0 or D < 1e-300:
        raise DegenerateCurvatureError(f"curvature denominator vanishes at u={u}")
    return abs(2.0 * abs(dj.value) ** 3 * num / D)


# --- closed-form families -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Case1Family:
    """kappa = 0, delta = c3 (c1 cos u + c2 sin u)^-2, q = +-|c3|^(1/2) q_AFF."""

    c1: float
    c2: float
    c3: float
    sign: float
    kappa: Expression
    delta: Expression
    f: Expression
    support: SupportField

    @property
    def constants(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3, "sgn": self.sign}

    def invariants(self, interval, lam: str = "0") -> InvariantTriple:
        return InvariantTriple(self.kappa, self.delta, parse(lam, self.constants), tuple(interval), self.constants)

    def point_components(self, u: float) -> tuple[float, float]:
        """Frame components (e, n) of the constant Laplace normal."""
        g = self.c1 * math.cos(u) + self.c2 * math.sin(u)
        s = self.sign * math.copysign(1.0, self.c3) * math.copysign(1.0, g)
        return s * (self.c1 * math.sin(u) - self.c2 * math.cos(u)), s * g

    def point_condition_residuals(self, u: float) -> tuple[float, float]:
        d = eval_jet3(self.delta, u, self.constants)
        f = eval_jet3(self.f, u, self.constants)
        p = d.derivative() * f / (d * d)
        g = f / d
        return p.d1 - 2.0 * g.value, p.value + 2.0 * g.d1


def family_case1_delta(c1: float, c2: float, c3: float, sign: float = 1.0) -> Case1Family:
    if c3 == 0.0:
        raise ValueError("c3 must be nonzero")
    if c1 == 0.0 and c2 == 0.0:
        raise ValueError("(c1, c2) must not both vanish")
    if sign not in (1.0, -1.0):
        raise ValueError("sign must be +1 or -1")
    consts = {"c1": float(c1), "c2": float(c2), "c3": float(c3), "sgn": float(sign)}
    return Case1Family(
        float(c1),
        float(c2),
        float(c3),
        float(sign),
        kappa=parse("0"),
        delta=parse("c3*(c1*cos(u) + c2*sin(u))^(-2)", consts),
        f=parse("sgn*abs(c3)/abs(c1*cos(u) + c2*sin(u))", consts),
        support=SupportField.general("sgn*abs(c3)/(abs(c1*cos(u) + c2*sin(u))*w)", consts),
    )


@dataclass(frozen=True, eq=False)
class Case2Family:
    """kappa = 0, delta = c2 cos^-2(u + c1): Gamma is a straight line for every q."""

    c1: float
    c2: float
    kappa: Expression
    delta: Expression

    @property
    def constants(self) -> dict:
        return {"c1": self.c1, "c2": self.c2}

    def invariants(self, interval, lam: str = "0") -> InvariantTriple:
        return InvariantTriple(self.kappa, self.delta, parse(lam, self.constants), tuple(interval), self.constants)

    def line_delta_residual(self, u: float) -> float:
        return line_delta_residual(eval_jet3(self.delta, u, self.constants))

    def direction_components(self, u: float) -> tuple[float, float]:
        """Frame components (e, n) of the constant unit direction of Gamma."""
        return math.sin(u + self.c1), math.cos(u + self.c1)


def family_case2_delta(c1: float, c2: float) -> Case2Family:
    if c2 == 0.0:
        raise ValueError("c2 must be nonzero")
    consts = {"c1": float(c1), "c2": float(c2)}
    return Case2Family(float(c1), float(c2), parse("0"), parse("c2*cos(u + c1)^(-2)", consts))
