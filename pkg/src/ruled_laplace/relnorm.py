"""Relative normalizations attached through a support function q.

Everything here is per point: the support jet q with partials (chain rule
through w = sqrt(v^2 + delta^2)), the covector X = xi/q, the relative metric
G = h/q and the relative normal y written in the Kruppa frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

from .expr import ZERO_TOL, BiJet2, Expression, Jet3, eval_bijet2, eval_jet3, evaluate, parse
from .surface import FramePoint, InvariantTriple, SurfacePoint


class NormalizationError(ValueError):
    """The support function vanishes, so it does not define a relative normalization."""


@dataclass(frozen=True, eq=False)
class SupportField:
    """Support function q: ``general`` q(u, v, w) or ``conoidal`` q = f(u)/w."""

    kind: str
    expr: Expression
    constants: Mapping[str, float]

    @classmethod
    def general(cls, text: str, constants: Optional[Mapping[str, float]] = None) -> "SupportField":
        consts = dict(constants or {})
        return cls("general", parse(text, consts), consts)

    @classmethod
    def conoidal(cls, text: str, constants: Optional[Mapping[str, float]] = None) -> "SupportField":
        consts = dict(constants or {})
        e = parse(text, consts)
        if e.variables - {"u"}:
            raise ValueError(f"conoidal-form f may only depend on u, got {sorted(e.variables)}")
        return cls("conoidal", e, consts)

    def __post_init__(self):
        if self.kind not in ("general", "conoidal"):
            raise ValueError(f"unknown support kind {self.kind!r}")

    @property
    def f(self) -> Expression:
        if self.kind != "conoidal":
            raise AttributeError("only conoidal-form supports have f")
        return self.expr

    def f_jet(self, u: float) -> Jet3:
        return eval_jet3(self.f, u, self.constants)

    def jet(self, u: float, v: float, delta: Jet3) -> BiJet2:
        w = w_jet(v, delta)
        if self.kind == "conoidal":
            q = BiJet2.from_jet3(self.f_jet(u)) / w
        else:
            q = eval_bijet2(self.expr, u, v, w, self.constants)
        if abs(q.value) <= ZERO_TOL:
            raise NormalizationError(f"q({u!r}, {v!r}) = {q.value!r} vanishes")
        return q

    def value(self, u: float, v: float, delta: float) -> float:
        w = math.sqrt(v * v + delta * delta)
        if self.kind == "conoidal":
            q = evaluate(self.expr, self.constants, u=u) / w
        else:
            q = evaluate(self.expr, self.constants, u=u, v=v, w=w)
        if abs(q) <= ZERO_TOL:
            raise NormalizationError(f"q({u!r}, {v!r}) = {q!r} vanishes")
        return q


def w_jet(v: float, delta: Jet3) -> BiJet2:
    V = BiJet2.variable_v(float(v))
    D = BiJet2.from_jet3(delta)
    return (V * V + D * D).sqrt()


class LocalJets(NamedTuple):
    """Scalar fields at (u, v) as BiJet2: kappa, delta, delta', v, w, q."""

    K: BiJet2
    D: BiJet2
    D1: BiJet2
    V: BiJet2
    W: BiJet2
    Q: BiJet2


def local_jets(inv: InvariantTriple, q: SupportField, u: float, v: float) -> LocalJets:
    kj, dj, _ = inv.jets(u)
    return LocalJets(
        K=BiJet2.from_jet3(kj),
        D=BiJet2.from_jet3(dj),
        D1=BiJet2.derivative_of_jet3(dj),
        V=BiJet2.variable_v(float(v)),
        W=w_jet(v, dj),
        Q=q.jet(u, v, dj),
    )


@dataclass(frozen=True, eq=False)
class RelativeStructure:
    q: BiJet2
    X: np.ndarray
    G11: float
    G12: float
    G22: float
    y: np.ndarray
    y_frame: tuple[float, float, float]

    @property
    def det_G(self) -> float:
        return self.G11 * self.G22 - self.G12 * self.G12


def _normal_components(J: LocalJets, Qu, Qv):
    """Frame components (e, n, z) of y; works on floats or jets."""
    K, D, D1, V, W, Q = J
    ye = -W * (D * Qu + Qv * (K * W * W + D1 * V)) / (D * D)
    yn = (D * D * Q - W * W * V * Qv) / (D * W)
    yz = -(V * Q + W * W * Qv) / W
    return ye, yn, yz


def relative_normal(
    pt: SurfacePoint, frame: FramePoint, inv: InvariantTriple, q: SupportField
) -> RelativeStructure:
    J = local_jets(inv, q, pt.u, pt.v)
    Q = J.Q
    ye, yn, yz = _normal_components(J, Q.du, Q.dv)
    ye, yn = ye.value, yn.value
    # q = f/w cancels v q + w^2 q_v identically; keep the zero exact
    yz = 0.0 if q.kind == "conoidal" else yz.value
    qv = Q.value
    return RelativeStructure(
        q=Q,
        X=pt.xi / qv,
        G11=pt.h11 / qv,
        G12=pt.h12 / qv,
        G22=pt.h22 / qv,
        y=frame.to_ambient(ye, yn, yz),
        y_frame=(ye, yn, yz),
    )


def relative_normal_derivatives(
    pt: SurfacePoint, frame: FramePoint, inv: InvariantTriple, q: SupportField
) -> tuple[np.ndarray, np.ndarray]:
    """Partials y_u, y_v of the relative normal (ambient), from first-order jets."""
    J = local_jets(inv, q, pt.u, pt.v)
    ye, yn, yz = _normal_components(J, J.Q.partial_u(), J.Q.partial_v())
    k = J.K.value
    y_u = frame.to_ambient(ye.du - yn.value, ye.value + yn.du - k * yz.value, yz.du + k * yn.value)
    y_v = frame.to_ambient(ye.dv, yn.dv, yz.dv)
    return y_u, y_v


def equiaffine_support(pt: SurfacePoint) -> float:
    """q_AFF = |K|^(1/4)."""
    return abs(pt.K) ** 0.25


def equiaffine_normal(
    pt: SurfacePoint, frame: FramePoint, inv: InvariantTriple
) -> tuple[np.ndarray, float]:
    kj, dj, _ = inv.jets(pt.u)
    k, d, d1 = kj.value, dj.value, dj.d1
    eps = math.copysign(1.0, d)
    scale = eps / math.sqrt(abs(d))
    y = scale * frame.to_ambient((2.0 * k * pt.v + d1) / (2.0 * d), 1.0)
    return y, equiaffine_support(pt)
