"""Truncated Taylor jets for forward-mode differentiation.

``Jet3`` carries a value and its first three derivatives in one variable.
``BiJet2`` carries a value and all partials up to total order two in two
variables ``(u, v)``.  Both share the elementary-function layer in
``_JetBase``: every unary function is applied through its derivative ladder
``(g, g', g'', g''')`` and the chain rule of the concrete jet type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

# |x| at or below this is treated as an exact zero in divisions and poles.
ZERO_TOL = 1e-12


class EvaluationError(ArithmeticError):
    """Raised instead of producing inf/NaN during jet evaluation."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


def _division_by_zero(x: float) -> EvaluationError:
    return EvaluationError("division-by-zero", f"division by zero (denominator {x!r})")


def _domain(message: str) -> EvaluationError:
    return EvaluationError("domain", message)


Number = Union[int, float]


class _JetBase:
    """Elementary functions shared by all jet types."""

    __slots__ = ()

    # subclasses provide: value, constant(), _chain(), __add__, __mul__, ...

    @property
    def is_constant(self) -> bool:
        return all(c == 0.0 for c in self.derivatives())

    def _lift(self, other):
        if isinstance(other, _JetBase):
            return other
        return self.constant(float(other))

    def __radd__(self, other):
        return self._lift(other) + self

    def __rsub__(self, other):
        return self._lift(other) - self

    def __rmul__(self, other):
        return self._lift(other) * self

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __truediv__(self, other):
        other = self._lift(other)
        return self * other.reciprocal()

    def __pow__(self, other):
        other = self._lift(other)
        p = other.value
        if other.is_constant:
            if p == int(p) and abs(p) <= 1 << 30:
                return self._int_pow(int(p))
            return self._real_pow(p)
        if self.value <= 0.0:
            raise _domain(f"variable exponent needs a positive base, got {self.value!r}")
        return (other * self.log()).exp()

    def __rpow__(self, other):
        return self._lift(other) ** self

    def _int_pow(self, n: int):
        if n < 0:
            return self._int_pow(-n).reciprocal()
        result = self.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _real_pow(self, p: float):
        x = self.value
        if x <= 0.0:
            raise _domain(f"non-integer power {p!r} of non-positive base {x!r}")
        return self._chain(
            x**p,
            p * x ** (p - 1.0),
            p * (p - 1.0) * x ** (p - 2.0),
            p * (p - 1.0) * (p - 2.0) * x ** (p - 3.0),
        )

    def reciprocal(self):
        x = self.value
        if abs(x) <= ZERO_TOL:
            raise _division_by_zero(x)
        r = 1.0 / x
        return self._chain(r, -r * r, 2.0 * r**3, -6.0 * r**4)

    def sin(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(s, c, -s, -c)

    def cos(self):
        s, c = math.sin(self.value), math.cos(self.value)
        return self._chain(c, -s, -c, s)

    def tan(self):
        if abs(math.cos(self.value)) <= ZERO_TOL:
            raise _domain(f"tan pole at {self.value!r}")
        t = math.tan(self.value)
        sec2 = 1.0 + t * t
        return self._chain(t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t))

    def exp(self):
        try:
            e = math.exp(self.value)
        except OverflowError:
            raise _domain(f"exp overflow at {self.value!r}") from None
        return self._chain(e, e, e, e)

    def log(self):
        x = self.value
        if x <= 0.0:
            raise _domain(f"log of non-positive value {x!r}")
        r = 1.0 / x
        return self._chain(math.log(x), r, -r * r, 2.0 * r**3)

    def sqrt(self):
        x = self.value
        if x <= 0.0:
            # sqrt(0) has an infinite first derivative
            raise _domain(f"sqrt of non-positive value {x!r}")
        s = math.sqrt(x)
        return self._chain(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x))

    def abs(self):
        x = self.value
        if abs(x) <= ZERO_TOL:
            raise _domain("abs is not differentiable at 0")
        sg = 1.0 if x > 0 else -1.0
        return self._chain(abs(x), sg, 0.0, 0.0)

    def sign(self):
        x = self.value
        sg = 0.0 if x == 0.0 else math.copysign(1.0, x)
        return self._chain(sg, 0.0, 0.0, 0.0)

    def check_finite(self):
        if not all(math.isfinite(c) for c in (self.value, *self.derivatives())):
            raise _domain("non-finite jet channel")
        return self


@dataclass(frozen=True)
class Jet3(_JetBase):
    """Value and derivatives d/du up to order three."""

    value: float
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0

    @classmethod
    def constant(cls, c: float) -> "Jet3":
        return cls(c)

    @classmethod
    def variable(cls, x: float) -> "Jet3":
        return cls(x, 1.0)

    def derivatives(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)

    def derivative(self) -> "Jet3":
        """Jet of the first derivative; its third channel is unknown and set to NaN."""
        return Jet3(self.d1, self.d2, self.d3, math.nan)

    def _chain(self, g0, g1, g2, g3) -> "Jet3":
        x1, x2, x3 = self.d1, self.d2, self.d3
        return Jet3(
            g0,
            g1 * x1,
            g2 * x1 * x1 + g1 * x2,
            g3 * x1**3 + 3.0 * g2 * x1 * x2 + g1 * x3,
        )

    def __add__(self, other) -> "Jet3":
        o = self._lift(other)
        return Jet3(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)

    def __sub__(self, other) -> "Jet3":
        o = self._lift(other)
        return Jet3(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2, self.d3 - o.d3)

    def __neg__(self) -> "Jet3":
        return Jet3(-self.value, -self.d1, -self.d2, -self.d3)

    def __mul__(self, other) -> "Jet3":
        o = self._lift(other)
        a0, a1, a2, a3 = self.value, self.d1, self.d2, self.d3
        b0, b1, b2, b3 = o.value, o.d1, o.d2, o.d3
        return Jet3(
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
            a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
        )


@dataclass(frozen=True)
class BiJet2(_JetBase):
    """Value and partials in (u, v) up to total order two."""

    value: float
    du: float = 0.0
    dv: float = 0.0
    duu: float = 0.0
    duv: float = 0.0
    dvv: float = 0.0

    @classmethod
    def constant(cls, c: float) -> "BiJet2":
        return cls(c)

    @classmethod
    def variable_u(cls, x: float) -> "BiJet2":
        return cls(x, du=1.0)

    @classmethod
    def variable_v(cls, x: float) -> "BiJet2":
        return cls(x, dv=1.0)

    @classmethod
    def from_jet3(cls, j: Jet3) -> "BiJet2":
        """Lift a function of u alone."""
        return cls(j.value, du=j.d1, duu=j.d2)

    @classmethod
    def derivative_of_jet3(cls, j: Jet3) -> "BiJet2":
        """Lift the u-derivative of a function of u alone (uses d1..d3)."""
        return cls(j.d1, du=j.d2, duu=j.d3)

    def derivatives(self) -> tuple[float, ...]:
        return (self.du, self.dv, self.duu, self.duv, self.dvv)

    def partial_u(self) -> "BiJet2":
        """First-order jet of d/du; second-order channels are unknown (NaN)."""
        return BiJet2(self.du, self.duu, self.duv, math.nan, math.nan, math.nan)

    def partial_v(self) -> "BiJet2":
        """First-order jet of d/dv; second-order channels are unknown (NaN)."""
        return BiJet2(self.dv, self.duv, self.dvv, math.nan, math.nan, math.nan)

    def _chain(self, g0, g1, g2, g3=None) -> "BiJet2":
        xu, xv = self.du, self.dv
        return BiJet2(
            g0,
            g1 * xu,
            g1 * xv,
            g2 * xu * xu + g1 * self.duu,
            g2 * xu * xv + g1 * self.duv,
            g2 * xv * xv + g1 * self.dvv,
        )

    def __add__(self, other) -> "BiJet2":
        o = self._lift(other)
        return BiJet2(
            self.value + o.value,
            self.du + o.du,
            self.dv + o.dv,
            self.duu + o.duu,
            self.duv + o.duv,
            self.dvv + o.dvv,
        )

    def __sub__(self, other) -> "BiJet2":
        o = self._lift(other)
        return BiJet2(
            self.value - o.value,
            self.du - o.du,
            self.dv - o.dv,
            self.duu - o.duu,
            self.duv - o.duv,
            self.dvv - o.dvv,
        )

    def __neg__(self) -> "BiJet2":
        return BiJet2(-self.value, -self.du, -self.dv, -self.duu, -self.duv, -self.dvv)

    def __mul__(self, other) -> "BiJet2":
        o = self._lift(other)
        a, b = self, o
        return BiJet2(
            a.value * b.value,
            a.du * b.value + a.value * b.du,
            a.dv * b.value + a.value * b.dv,
            a.duu * b.value + 2.0 * a.du * b.du + a.value * b.duu,
            a.duv * b.value + a.du * b.dv + a.dv * b.du + a.value * b.duv,
            a.dvv * b.value + 2.0 * a.dv * b.dv + a.value * b.dvv,
        )
