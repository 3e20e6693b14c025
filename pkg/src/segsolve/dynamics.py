"""Internal dynamics f(x, s) and their primitives F(x, s) = int_0^s f(x, v) dv.

Dynamics are given on s >= 0 and extended oddly to s < 0, so F is even.
Points are passed as a tuple of coordinate arrays, ``(x,)`` or ``(x, y)``,
broadcastable against ``s``.

For s-independent dynamics (``constant``) the value at s = 0 is the
right limit c, not 0. That is the one-sided derivative of F(s) = c|s| at
0+, and it is what makes the fixed-point scheme the optimality system of
the discrete energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import ValidationError

CATALOG = ("zero", "constant", "weighted_abs", "weighted_sqrt")


def _r2(point) -> np.ndarray:
    return sum(np.asarray(c, dtype=float) ** 2 for c in point)


@dataclass(frozen=True)
class Dynamics:
    """One internal dynamic. ``f`` and ``F`` take ``(point, s)``.

    ``vanishes_at_zero`` is False only for s-independent dynamics, where the
    standing assumption f(x, 0) = 0 is replaced by f >= 0.
    """

    f: Callable = field(repr=False)
    F: Callable = field(repr=False)
    name: str = "custom"
    coef: float | None = None
    nonneg: bool = True
    monotone: bool = True
    vanishes_at_zero: bool = True

    def __call__(self, point, s):
        return self.f(point, s)

    def bind(self, point) -> Callable[[np.ndarray], np.ndarray]:
        """``s -> f(point, s)`` with any point-dependent weight precomputed."""
        if self.name == "zero":
            return np.zeros_like
        if self.name == "constant":
            c = self.coef
            return lambda s: np.where(s >= 0, c, -c)
        if self.name == "weighted_abs":
            w = self.coef * _r2(point)
            return lambda s: w * s
        if self.name == "weighted_sqrt":
            w = self.coef * _r2(point)
            return lambda s: w * (np.sign(s) * np.sqrt(np.abs(s)))
        return lambda s: self.f(point, s)

    def resolvent(self, point, tau: float) -> Callable[[np.ndarray], np.ndarray]:
        """``a -> w`` solving w + tau f(point, w) = a for w > 0, for catalog dynamics.

        Only meaningful where a root w > 0 exists; callers clamp the result at 0.
        """
        if self.name == "zero":
            return lambda a: a
        if self.name == "constant":
            c = tau * self.coef
            return lambda a: a - c
        if self.name == "weighted_abs":
            scale = 1.0 / (1.0 + tau * self.coef * _r2(point))
            return lambda a: a * scale
        if self.name == "weighted_sqrt":
            b = tau * self.coef * _r2(point)

            def solve(a):
                # sqrt(w) is the positive root of q^2 + b q - a
                q = 0.5 * (np.sqrt(b * b + 4.0 * np.maximum(a, 0.0)) - b)
                return np.where(a > 0, q * q, a)

            return solve
        raise ValidationError(f"no closed-form resolvent for dynamics {self.name!r}")

    def to_config(self) -> dict:
        if self.name not in CATALOG:
            raise ValidationError(f"dynamics {self.name!r} is not a catalog entry")
        return {"kind": self.name, "coef": 0.0 if self.coef is None else float(self.coef)}


def builtin(name: str, coef: float = 0.0) -> Dynamics:
    """Catalog dynamics: ``zero``, ``constant(c)``, ``weighted_abs(c)``, ``weighted_sqrt(c)``.

    weighted_abs is c (x^2+y^2) |s| on s >= 0, whose odd extension is the
    linear c (x^2+y^2) s.
    """
    c = float(coef)
    if c < 0 or not np.isfinite(c):
        raise ValidationError(f"coefficient must be a finite number >= 0, got {coef}")
    if name == "zero":
        return Dynamics(
            f=lambda p, s: np.zeros(np.broadcast(_r2(p), s).shape),
            F=lambda p, s: np.zeros(np.broadcast(_r2(p), s).shape),
            name="zero", coef=0.0,
        )
    if name == "constant":
        return Dynamics(
            f=lambda p, s: np.broadcast_to(np.where(np.asarray(s) >= 0, c, -c), np.broadcast(_r2(p), s).shape),
            F=lambda p, s: np.broadcast_to(c * np.abs(s), np.broadcast(_r2(p), s).shape),
            name="constant", coef=c, vanishes_at_zero=(c == 0.0),
        )
    if name == "weighted_abs":
        return Dynamics(
            f=lambda p, s: c * _r2(p) * np.asarray(s, dtype=float),
            F=lambda p, s: 0.5 * c * _r2(p) * np.asarray(s, dtype=float) ** 2,
            name="weighted_abs", coef=c,
        )
    if name == "weighted_sqrt":
        return Dynamics(
            f=lambda p, s: c * _r2(p) * (np.sign(s) * np.sqrt(np.abs(s))),
            F=lambda p, s: (2.0 / 3.0) * c * _r2(p) * np.abs(s) ** 1.5,
            name="weighted_sqrt", coef=c,
        )
    raise ValidationError(f"unknown dynamics {name!r}; expected one of {CATALOG}")


def from_config(cfg: dict) -> Dynamics:
    try:
        kind = cfg["kind"]
    except (KeyError, TypeError):
        raise ValidationError(f"dynamics entry needs a 'kind': {cfg!r}") from None
    return builtin(kind, cfg.get("coef", 0.0))


@dataclass(frozen=True)
class Violation:
    rule: str
    point: tuple[float, ...]
    s: float
    detail: str


@dataclass
class ValidationReport:
    dynamics: str
    violations: list[Violation] = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "dynamics": self.dynamics,
            "ok": self.ok,
            "checked": self.checked,
            "violations": [v.__dict__ for v in self.violations],
        }


DEFAULT_S = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


def validate(spec: Dynamics, grid, s_samples=DEFAULT_S, quad_tol: float = 1e-8) -> ValidationReport:
    """Check the standing assumptions on every grid node and sample value of s."""
    s_samples = sorted(float(s) for s in s_samples)
    if not s_samples:
        raise ValidationError("need at least one s sample")
    report = ValidationReport(spec.name)
    pts = [grid.point(a) for a in grid.nodes()]

    def f(p, s):
        return float(np.asarray(spec.f(p, s)))

    def F(p, s):
        return float(np.asarray(spec.F(p, s)))

    def flag(rule, p, s, detail):
        report.violations.append(Violation(rule, p, s, detail))

    for p in pts:
        if spec.vanishes_at_zero and f(p, 0.0) != 0.0:
            flag("zero_at_origin", p, 0.0, f"f(x,0)={f(p, 0.0):g}≠0")
        prev = None
        for s in s_samples:
            report.checked += 1
            fs = f(p, s)
            if s != 0.0 and f(p, -s) != -fs:
                flag("odd_extension", p, s, f"f(x,-s)={f(p, -s):g} but -f(x,s)={-fs:g}")
            if F(p, -s) != F(p, s):
                flag("even_primitive", p, s, f"F(x,-s)={F(p, -s):g} but F(x,s)={F(p, s):g}")
            if spec.nonneg and s >= 0 and fs < 0:
                flag("nonneg", p, s, f"f(x,s)={fs:g}<0")
            if spec.monotone and prev is not None and fs < prev:
                flag("monotone", p, s, f"f decreases to {fs:g} from {prev:g}")
            prev = fs
            if s != 0.0:
                # split at 0 so the jump of an s-independent f is not straddled
                q, _ = integrate.quad(lambda v: f(p, v), 0.0, s, epsabs=1e-12, epsrel=1e-12, limit=200)
                if abs(q - F(p, s)) > quad_tol:
                    flag("primitive", p, s, f"F(x,s)={F(p, s):.12g} but quadrature gives {q:.12g}")
    return report
