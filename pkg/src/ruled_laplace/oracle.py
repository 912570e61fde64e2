"""Independent numerical checks.

``laplacian_oracle`` applies the Laplace-Beltrami operator of the relative
metric G = h/q to the position vector by nested central differences.  It
only looks at patch points (x and h_ij) and values of q, so it shares no
algebra with the closed-form Laplace normal in ``laplace``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .relnorm import SupportField
from .surface import RuledSurface


class StencilError(ValueError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    fd_step: float = 1e-4
    richardson: bool = True
    svd_tol: float = 1e-6

    def __post_init__(self):
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")


# 5-point central stencil for the first derivative
_OFFSETS = (-2, -1, 1, 2)
_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


class _Probe:
    """Memoised samples of x and G on an integer lattice around (u, v)."""

    def __init__(self, surface: RuledSurface, q: SupportField, u: float, v: float, h: float):
        self.surface, self.q = surface, q
        self.u, self.v, self.h = u, v, h
        self._points: dict = {}
        self._flux_factors: dict = {}

    def point(self, i: int, j: int):
        key = (i, j)
        if key not in self._points:
            u, v = self.u + i * self.h, self.v + j * self.h
            self._points[key] = self.surface.point(u, v, anchor=self.u)
        return self._points[key]

    def x(self, i: int, j: int) -> np.ndarray:
        return self.point(i, j).x

    def metric(self, i: int, j: int):
        """(sqrt|det G|, inverse G) at lattice point (i, j)."""
        key = (i, j)
        if key not in self._flux_factors:
            u, v = self.u + i * self.h, self.v + j * self.h
            pt = self.point(i, j)
            qv = self.q.value(u, v, self.surface.inv.values(u)[1])
            G = np.array([[pt.h11, pt.h12], [pt.h12, pt.h22]]) / qv
            det = G[0, 0] * G[1, 1] - G[0, 1] ** 2
            if abs(det) < 1e-14:
                raise StencilError(f"|det G| = {abs(det):.3g} too small at ({u}, {v})")
            inv = np.array([[G[1, 1], -G[0, 1]], [-G[0, 1], G[0, 0]]]) / det
            self._flux_factors[key] = (math.sqrt(abs(det)), inv)
        return self._flux_factors[key]

    def dx(self, i: int, j: int, axis: int, k: int) -> np.ndarray:
        """d x / d u^axis at (i, j) with lattice spacing k."""
        acc = np.zeros(3)
        for o, wgt in zip(_OFFSETS, _WEIGHTS):
            acc += wgt * (self.x(i + k * o, j) if axis == 0 else self.x(i, j + k * o))
        return acc / (k * self.h)

    def flux(self, i: int, j: int, axis: int, k: int) -> np.ndarray:
        root, ginv = self.metric(i, j)
        grad = (self.dx(i, j, 0, k), self.dx(i, j, 1, k))
        return root * (ginv[axis, 0] * grad[0] + ginv[axis, 1] * grad[1])

    def laplacian(self, k: int) -> np.ndarray:
        div = np.zeros(3)
        for axis in (0, 1):
            for o, wgt in zip(_OFFSETS, _WEIGHTS):
                ii, jj = (k * o, 0) if axis == 0 else (0, k * o)
                div += wgt * self.flux(ii, jj, axis, k)
        div /= k * self.h
        return div / self.metric(0, 0)[0]


def laplacian_oracle(
    surface: RuledSurface,
    q: SupportField,
    u: float,
    v: float,
    cfg: Optional[OracleConfig] = None,
) -> np.ndarray:
    """Half the relative Laplacian of the position vector at (u, v), by finite differences."""
    cfg = cfg or OracleConfig()
    h = cfg.fd_step
    reach = (8 if cfg.richardson else 4) * h
    u_min, u_max = surface.interval
    if u - reach < u_min or u + reach > u_max:
        raise StencilError(f"stencil of reach {reach:g} around u={u} leaves [{u_min}, {u_max}]")
    probe = _Probe(surface, q, u, v, h)
    lap = probe.laplacian(1)
    if cfg.richardson:
        # 4th-order stencils: combine spacings h and 2h
        lap = (16.0 * lap - probe.laplacian(2)) / 15.0
    return lap / 2.0


def _singular_values(columns: Sequence) -> np.ndarray:
    m = np.atleast_2d(np.asarray(columns, dtype=float))
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(columns: Sequence, tol: float = 1e-6) -> int:
    """Number of singular values above tol * largest; 0 if the largest is below tol."""
    if not 1 <= len(columns) <= 4:
        raise ValueError("numerical_rank takes 1 to 4 columns")
    sv = _singular_values(columns)
    if sv[0] < tol:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def _centered_svd(samples):
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
        raise ValueError("need at least two 3-vectors")
    centered = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centered, full_matrices=False)
    sv = np.concatenate([sv, np.zeros(3 - len(sv))])
    return sv, vt


def fit_line(samples) -> tuple[float, Optional[np.ndarray]]:
    """Total-least-squares line; residual = |(s2, s3)| / s1.  Coincident samples give (0, None)."""
    sv, vt = _centered_svd(samples)
    scale = np.max(np.abs(np.asarray(samples, dtype=float)))
    if sv[0] <= 1e-15 * max(1.0, scale):
        return 0.0, None
    return float(math.hypot(sv[1], sv[2]) / sv[0]), vt[0]


def fit_plane(samples) -> tuple[float, Optional[np.ndarray]]:
    """Total-least-squares plane; residual = s3 / s1, normal is the third right singular vector."""
    sv, vt = _centered_svd(samples)
    scale = np.max(np.abs(np.asarray(samples, dtype=float)))
    if sv[0] <= 1e-15 * max(1.0, scale):
        return 0.0, None
    if vt.shape[0] < 3:
        # two samples: any plane through the line fits
        return 0.0, None
    return float(sv[2] / sv[0]), vt[2]


def diameter(samples) -> float:
    pts = np.asarray(samples, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
