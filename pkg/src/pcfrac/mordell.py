"""Constants of the non-convex Minkowski bound for the L^p quasinorm, 0 < p < 1.

All quantities are :class:`~pcfrac.numerics.Real` values. The exponent ``p``
is always an exact rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .numerics import (
    DEFAULT_POLICY,
    Interval,
    Ordering,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    cmp,
    gamma,
    log,
    pow_real,
    quasinorm,
    sqrt,
)

PHI = (1 + sqrt(5)) / 2


def as_exponent(p) -> Fraction:
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return p


class Bisection:
    """Verified-sign-change bisection, resumable to any width.

    ``residual(x)`` returns a Real whose sign is certified with
    :func:`cmp`; the bracket ``[lo, hi]`` always satisfies
    ``sign(residual(lo)) == sign_lo`` and the opposite sign at ``hi``.
    """

    def __init__(self, residual: Callable[[Fraction], Real], lo: Fraction, hi: Fraction,
                 policy: PrecisionPolicy = DEFAULT_POLICY):
        self.residual = residual
        self.policy = policy
        self.lo, self.hi = Fraction(lo), Fraction(hi)
        self.sign_lo = self._sign(self.lo)
        if self._sign(self.hi) == self.sign_lo:
            raise UndecidableComparison(f"no certified sign change on [{lo}, {hi}]")

    def _sign(self, x: Fraction) -> int:
        return cmp(self.residual(x), 0, self.policy).value

    def narrow_to(self, width: Fraction) -> tuple[Fraction, Fraction]:
        while self.hi - self.lo > width:
            mid = (self.lo + self.hi) / 2
            if self._sign(mid) == self.sign_lo:
                self.lo = mid
            else:
                self.hi = mid
        return self.lo, self.hi

    def interval(self, width: Fraction) -> Interval:
        lo, hi = self.narrow_to(width)
        bits = max(lo.denominator.bit_length(), hi.denominator.bit_length()) + 64
        return Interval(Interval.exact(lo, bits).lo, Interval.exact(hi, bits).hi)

    def real(self) -> Real:
        return Real(lambda prec: self.interval(Fraction(1, 2 ** (prec + 2))))


def jp_residual(p: Fraction) -> Callable[[Fraction], Real]:
    """``j -> (1+j)^p + (1-j)^p - 1 - j^p``; its root in (0, 1) is ``b_p / a_p``."""

    def g(j: Fraction) -> Real:
        return pow_real(1 + j, p) + pow_real(1 - j, p) - 1 - pow_real(Real.exact(j), p)

    return g


def _jp_bisection(p: Fraction, policy: PrecisionPolicy) -> Bisection:
    # g(0) = 1 > 0 and g(1) = 2^p - 2 < 0; endpoints nudged inwards to stay off j = 0
    return Bisection(jp_residual(p), Fraction(1, 2**20), Fraction(1), policy)


def solve_jp(p, target_width=Fraction(1, 2**64), policy: PrecisionPolicy = DEFAULT_POLICY) -> Interval:
    """Enclosure of the unique root ``j_p`` of ``(1+j)^p + (1-j)^p = 1 + j^p`` in (0, 1)."""
    p = as_exponent(p)
    return _jp_bisection(p, policy).interval(Fraction(target_width))


def jp_real(p, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    p = as_exponent(p)
    r = _jp_bisection(p, policy).real()
    r.name = f"j_{p}"
    return r


def gamma_ratio(p) -> Real:
    """``Gamma(1+1/p)^2 / Gamma(1+2/p)``, the area of the unit L^p ball over 4."""
    p = as_exponent(p)
    return gamma(1 + 1 / p) ** 2 / gamma(1 + 2 / p)


@dataclass(frozen=True)
class MordellConstants:
    p: Fraction
    j_p: Real = field(repr=False)
    a_p: Real = field(repr=False)
    b_p: Real = field(repr=False)
    c_p: Real = field(repr=False)
    beta_p: Real = field(repr=False)
    beta_p_from_cp: Real = field(repr=False)
    gm_bound: Real = field(repr=False)
    area_const_Cp: Real = field(repr=False)
    det_bound: Real = field(repr=False)
    eps_bound_Mp: Real = field(repr=False)
    ell_bound: Real = field(repr=False)
    ell_max: int
    bits: int = 128

    REAL_FIELDS = (
        "j_p", "a_p", "b_p", "c_p", "beta_p", "beta_p_from_cp", "gm_bound",
        "area_const_Cp", "det_bound", "eps_bound_Mp", "ell_bound",
    )

    def enclosures(self, bits: int | None = None) -> dict[str, Interval]:
        bits = bits or self.bits
        return {name: getattr(self, name).at(bits) for name in self.REAL_FIELDS}


def constants(p, target_width: int = 128, policy: PrecisionPolicy = DEFAULT_POLICY) -> MordellConstants:
    """All constants for exponent ``p``; enclosures are reported at ``target_width`` bits."""
    p = as_exponent(p)
    j = jp_real(p, policy)
    a = sqrt(2 / (j * j + 1))
    b = j * a
    c = pow_real(2, -1 / p) * quasinorm(a, b, p)
    beta_from_c = pow_real(2, 2 / p - 1) * c * c
    beta = pow_real(1 + pow_real(j, p), 2 / p) / (1 + j * j)
    gm = pow_real(4, -1 / p) * beta
    G = gamma_ratio(p)
    area_const = pow_real(2, 2 / p + 1) * G * c * c
    det_bound = pow_real(2, 4 / p - 1) * G * c * c
    ell_bound = log(pow_real(2, 4 / p - 1) * sqrt(5) * G) / log(PHI)
    ell_max = _floor_of_upper(ell_bound, target_width)
    return MordellConstants(
        p=p, j_p=j, a_p=a, b_p=b, c_p=c, beta_p=beta, beta_p_from_cp=beta_from_c,
        gm_bound=gm, area_const_Cp=area_const, det_bound=det_bound,
        eps_bound_Mp=det_bound * det_bound, ell_bound=ell_bound, ell_max=ell_max,
        bits=target_width,
    )


def _floor_of_upper(x: Real, bits: int) -> int:
    # conservative: floor of the upper endpoint is never below floor of the value
    iv = x.at(bits)
    return math.floor(iv.fractions()[1])


def gm_curve(p_grid: Iterable, policy: PrecisionPolicy = DEFAULT_POLICY,
             map_fn=map) -> list[tuple[Fraction, Real]]:
    """``4^{-1/p} beta_p`` along a strictly increasing grid, certified increasing.

    ``map_fn`` may be an order-preserving parallel map (e.g. ``Executor.map``).
    """
    grid = [as_exponent(p) for p in p_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    values = list(map_fn(lambda p: constants(p, policy=policy).gm_bound, grid))
    for (p0, v0), (p1, v1) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if cmp(v0, v1, policy) is not Ordering.LT:
            raise AssertionError(f"gm_bound not increasing between p={p0} and p={p1}")
    return list(zip(grid, values))


def parse_grid(text: str) -> list[Fraction]:
    """``a:b:step`` with exact rationals, endpoints inclusive."""
    try:
        a, b, step = (Fraction(x) for x in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"grid must look like a:b:step, got {text!r}") from exc
    if step <= 0 or b < a:
        raise ValueError("grid needs step > 0 and a <= b")
    n = int((b - a) / step)
    return [a + k * step for k in range(n + 1)]
