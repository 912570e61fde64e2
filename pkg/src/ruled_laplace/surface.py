"""Skew ruled surfaces rebuilt from their invariants (kappa, delta, lambda).

The Kruppa frame (e, n, z) and the striction line s obey

    e' = n,   n' = -e + kappa z,   z' = -kappa n,   s' = delta (lambda e + z)

which is integrated with fixed-step RK4 and a Gram-Schmidt pass after every
step.  Points of the patch x(u, v) = s(u) + v e(u) are assembled from a frame
and the invariant jets at u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .expr import Expression, Jet3, eval_jet3, evaluate, parse

TORSAL_TOL = 1e-12
DEFAULT_STEP = 1e-3


class TorsalRulingError(ValueError):
    """delta vanishes (numerically) somewhere: the surface has a torsal ruling."""


class FrameError(ValueError):
    """A frame is not orthonormal and right-handed, or a frame grid is unusable."""


@dataclass(frozen=True, eq=False)
class InvariantTriple:
    kappa: Expression
    delta: Expression
    lam: Expression
    interval: tuple[float, float]
    constants: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def from_strings(
        cls,
        kappa: str,
        delta: str,
        lam: str,
        interval: tuple[float, float],
        constants: Optional[Mapping[str, float]] = None,
    ) -> "InvariantTriple":
        consts = dict(constants or {})
        exprs = [parse(s, consts) for s in (kappa, delta, lam)]
        for name, e in zip(("kappa", "delta", "lambda"), exprs):
            if e.variables - {"u"}:
                raise ValueError(f"{name} may only depend on u, got {sorted(e.variables)}")
        u_min, u_max = float(interval[0]), float(interval[1])
        if not u_min < u_max:
            raise ValueError(f"empty interval [{u_min}, {u_max}]")
        return cls(exprs[0], exprs[1], exprs[2], (u_min, u_max), consts)

    def values(self, u: float) -> tuple[float, float, float]:
        k = evaluate(self.kappa, self.constants, u=u)
        d = evaluate(self.delta, self.constants, u=u)
        lam = evaluate(self.lam, self.constants, u=u)
        if abs(d) < TORSAL_TOL:
            raise TorsalRulingError(f"delta({u!r}) = {d!r}: torsal ruling")
        return k, d, lam

    def jets(self, u: float) -> tuple[Jet3, Jet3, Jet3]:
        k = eval_jet3(self.kappa, u, self.constants)
        d = eval_jet3(self.delta, u, self.constants)
        lam = eval_jet3(self.lam, u, self.constants)
        if abs(d.value) < TORSAL_TOL:
            raise TorsalRulingError(f"delta({u!r}) = {d.value!r}: torsal ruling")
        return k, d, lam

    def epsilon(self, u: float) -> float:
        return math.copysign(1.0, self.values(u)[1])

    def striction_angle(self, u: float) -> float:
        """sigma with cot(sigma) = lambda, in (-pi/2, pi/2]."""
        lam = self.values(u)[2]
        return math.pi / 2 if lam == 0.0 else math.atan(1.0 / lam)


@dataclass(frozen=True, eq=False)
class FramePoint:
    u: float
    e: np.ndarray
    n: np.ndarray
    z: np.ndarray
    s: np.ndarray

    @classmethod
    def standard(cls, u: float = 0.0, s=(0.0, 0.0, 0.0)) -> "FramePoint":
        eye = np.eye(3)
        return cls(u, eye[0], eye[1], eye[2], np.asarray(s, dtype=float))

    def matrix(self) -> np.ndarray:
        """Columns e, n, z."""
        return np.column_stack([self.e, self.n, self.z])

    def to_ambient(self, ce: float, cn: float, cz: float = 0.0) -> np.ndarray:
        return ce * self.e + cn * self.n + cz * self.z

    def to_frame(self, vec) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        return np.array([vec @ self.e, vec @ self.n, vec @ self.z])

    def orthonormality_error(self) -> float:
        m = self.matrix()
        return float(np.max(np.abs(m.T @ m - np.eye(3))))

    def check(self, tol: float = 1e-9) -> None:
        if self.orthonormality_error() > tol:
            raise FrameError(f"frame at u={self.u} is not orthonormal")
        if np.linalg.det(self.matrix()) <= 0.0:
            raise FrameError(f"frame at u={self.u} is left-handed")


@dataclass(frozen=True, eq=False)
class SurfacePoint:
    u: float
    v: float
    x: np.ndarray
    x_u: np.ndarray
    x_v: np.ndarray
    xi: np.ndarray
    w: float
    h11: float
    h12: float
    h22: float
    K: float


def _rhs(inv: InvariantTriple, u: float, y: np.ndarray) -> np.ndarray:
    k, d, lam = inv.values(u)
    e, n, z = y[0:3], y[3:6], y[6:9]
    return np.concatenate([n, -e + k * z, -k * n, d * (lam * e + z)])


def _gram_schmidt(y: np.ndarray) -> np.ndarray:
    e, n, z = y[0:3], y[3:6], y[6:9]
    e = e / np.linalg.norm(e)
    n = n - (n @ e) * e
    n = n / np.linalg.norm(n)
    z = z - (z @ e) * e - (z @ n) * n
    z = z / np.linalg.norm(z)
    return np.concatenate([e, n, z, y[9:12]])


def _rk4(inv: InvariantTriple, u: float, y: np.ndarray, h: float) -> np.ndarray:
    k1 = _rhs(inv, u, y)
    k2 = _rhs(inv, u + 0.5 * h, y + 0.5 * h * k1)
    k3 = _rhs(inv, u + 0.5 * h, y + 0.5 * h * k2)
    k4 = _rhs(inv, u + h, y + h * k3)
    return _gram_schmidt(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _pack(f: FramePoint) -> np.ndarray:
    return np.concatenate([f.e, f.n, f.z, f.s])


def _unpack(u: float, y: np.ndarray) -> FramePoint:
    return FramePoint(u, y[0:3].copy(), y[3:6].copy(), y[6:9].copy(), y[9:12].copy())


def _march(inv, u0, y0, u_end, step) -> list[FramePoint]:
    span = u_end - u0
    if span == 0.0:
        return []
    count = max(1, math.ceil(abs(span) / step - 1e-9))
    h = span / count
    out = []
    y = y0
    for i in range(count):
        y = _rk4(inv, u0 + i * h, y, h)
        out.append(_unpack(u0 + (i + 1) * h if i + 1 < count else u_end, y))
    return out


def integrate_frame(
    inv: InvariantTriple,
    u0: Optional[float] = None,
    frame0: Optional[FramePoint] = None,
    step: float = DEFAULT_STEP,
) -> list[FramePoint]:
    """Integrate the frame over ``inv.interval`` starting from ``frame0`` at ``u0``.

    When ``u0`` is interior the integration runs both ways; the result is
    sorted by u.  Each side uses the largest step <= ``step`` that divides it.
    """
    u_min, u_max = inv.interval
    u0 = u_min if u0 is None else float(u0)
    if not u_min <= u0 <= u_max:
        raise ValueError(f"u0={u0} outside [{u_min}, {u_max}]")
    if step <= 0:
        raise ValueError("step must be positive")
    if frame0 is None:
        frame0 = FramePoint.standard(u0)
    frame0.check()
    inv.values(u0)
    y0 = _pack(frame0)
    start = _unpack(u0, y0)
    backward = _march(inv, u0, y0, u_min, step)
    forward = _march(inv, u0, y0, u_max, step)
    return backward[::-1] + [start] + forward


class RuledSurface:
    """Invariants plus an integrated frame track; evaluates patch points anywhere."""

    def __init__(
        self,
        inv: InvariantTriple,
        step: float = DEFAULT_STEP,
        u0: Optional[float] = None,
        frame0: Optional[FramePoint] = None,
    ):
        self.inv = inv
        self.step = step
        self.frames = integrate_frame(inv, u0, frame0, step)
        self.nodes = np.array([f.u for f in self.frames])

    @property
    def interval(self) -> tuple[float, float]:
        return self.inv.interval

    def frame_at(self, u: float, anchor: Optional[float] = None) -> FramePoint:
        """Frame at ``u`` via one RK4 sub-step from the node nearest ``anchor`` (default u).

        Sharing an anchor makes nearby evaluations one smooth function of u,
        which finite-difference stencils rely on.
        """
        u_min, u_max = self.interval
        if not u_min - 1e-12 <= u <= u_max + 1e-12:
            raise ValueError(f"u={u} outside [{u_min}, {u_max}]")
        target = u if anchor is None else anchor
        i = int(np.argmin(np.abs(self.nodes - target)))
        node = self.frames[i]
        h = u - node.u
        if h == 0.0:
            return node
        return _unpack(u, _rk4(self.inv, node.u, _pack(node), h))

    def point(self, u: float, v: float, anchor: Optional[float] = None) -> SurfacePoint:
        return patch_point(self.inv, self.frame_at(u, anchor), v)


def patch_point(inv: InvariantTriple, frame: FramePoint, v: float) -> SurfacePoint:
    """Position, partials, unit normal, second fundamental form and K at (frame.u, v).

    h12 is delta/w, the value <x_uv, xi> consistent with K = -delta^2/w^4.
    """
    kj, dj, lj = inv.jets(frame.u)
    k, d, d1, lam = kj.value, dj.value, dj.d1, lj.value
    e, n, z, s = frame.e, frame.n, frame.z, frame.s
    w = math.sqrt(v * v + d * d)
    s_prime = d * (lam * e + z)
    return SurfacePoint(
        u=frame.u,
        v=float(v),
        x=s + v * e,
        x_u=s_prime + v * n,
        x_v=e.copy(),
        xi=(d / w) * n - (v / w) * z,
        w=w,
        h11=-(k * v * v + d1 * v + d * d * (k - lam)) / w,
        h12=d / w,
        h22=0.0,
        K=-(d * d) / w**4,
    )


@dataclass(frozen=True)
class InvariantSamples:
    u: np.ndarray
    kappa: np.ndarray
    delta: np.ndarray
    lam: np.ndarray


def _stencil_d1(a: np.ndarray, h: float) -> np.ndarray:
    return (a[:-4] - 8.0 * a[1:-3] + 8.0 * a[3:-1] - a[4:]) / (12.0 * h)


def _stencil_d2(a: np.ndarray, h: float) -> np.ndarray:
    return (-a[:-4] + 16.0 * a[1:-3] - 30.0 * a[2:-2] + 16.0 * a[3:-1] - a[4:]) / (12.0 * h * h)


def recover_invariants(frames: Sequence[FramePoint]) -> InvariantSamples:
    """Recover (kappa, delta, lambda) at interior nodes with 5-point differences.

    Uses kappa = (e, e', e''), delta = (s', e, e'), lambda = <s', e>/delta.
    """
    if len(frames) < 5:
        raise FrameError(f"need at least 5 frames, got {len(frames)}")
    for f in frames:
        f.check(1e-6)
    us = np.array([f.u for f in frames])
    steps = np.diff(us)
    h = float(steps.mean())
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(h)):
        raise FrameError("frames must lie on a uniform increasing grid")
    E = np.array([f.e for f in frames])
    S = np.array([f.s for f in frames])
    e = E[2:-2]
    de = _stencil_d1(E, h)
    dde = _stencil_d2(E, h)
    ds = _stencil_d1(S, h)
    kappa = np.einsum("ij,ij->i", e, np.cross(de, dde))
    delta = np.einsum("ij,ij->i", ds, np.cross(e, de))
    lam = np.einsum("ij,ij->i", ds, e) / delta
    return InvariantSamples(us[2:-2], kappa, delta, lam)
