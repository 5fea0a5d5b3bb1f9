"""Verified real arithmetic.

Two layers live here:

* :class:`Interval` is a closed interval ``[lo, hi]`` with MPFR endpoints.
  Every operation rounds its lower endpoint towards -inf and its upper
  endpoint towards +inf, so the exact result of the operation applied to
  any point of the inputs is contained in the output.
* :class:`Real` is a lazily refinable real number: a function from a working
  precision (in bits) to an :class:`Interval` known to contain the value.
  Comparisons between reals go through :func:`cmp`, which raises the
  precision until the enclosures separate or a :class:`PrecisionPolicy`
  limit is hit.
"""

from __future__ import annotations

import enum
import math
import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Union

import gmpy2
from gmpy2 import mpfr, mpq, mpz

Number = Union[int, Fraction]

# gamma is increasing on [x0, inf) with x0 = 1.4616...; only that branch is supported
GAMMA_MONOTONE_FROM = Fraction(3, 2)


class UndecidableComparison(ArithmeticError):
    """Two reals could not be separated at the maximum allowed precision."""


class DomainError(ValueError):
    """An operation was applied outside the domain where it is defined."""


class Ordering(enum.Enum):
    LT = -1
    GT = 1


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_bits: int = 128
    max_bits: int = 16384
    escalation_factor: int = 2

    def __post_init__(self):
        if self.initial_bits < 2 or self.max_bits < 2:
            raise ValueError("precision must be at least 2 bits")
        if self.initial_bits > self.max_bits:
            raise ValueError("initial_bits must not exceed max_bits")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be >= 2")

    def schedule(self) -> Iterator[int]:
        bits = self.initial_bits
        while True:
            yield bits
            if bits >= self.max_bits:
                return
            bits = min(bits * self.escalation_factor, self.max_bits)

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "PrecisionPolicy":
        """Default policy, with ``PCF_MAX_BITS`` overriding ``max_bits``."""
        environ = os.environ if environ is None else environ
        raw = environ.get("PCF_MAX_BITS")
        if raw is not None and "max_bits" not in overrides:
            overrides["max_bits"] = int(raw)
        if "max_bits" in overrides and "initial_bits" not in overrides:
            overrides["initial_bits"] = min(cls.initial_bits, overrides["max_bits"])
        return cls(**overrides)


DEFAULT_POLICY = PrecisionPolicy()


@dataclass
class PrecisionReport:
    """Collects the precision actually used by :func:`cmp` within a scope."""

    max_bits_used: int = 0
    escalations: int = 0
    comparisons: int = 0
    undecidable: int = 0

    def as_dict(self) -> dict:
        return {
            "max_bits_used": self.max_bits_used,
            "escalations": self.escalations,
            "comparisons": self.comparisons,
            "undecidable": self.undecidable,
        }


_report: ContextVar[PrecisionReport | None] = ContextVar("pcfrac_precision_report", default=None)


@contextmanager
def precision_report() -> Iterator[PrecisionReport]:
    report = PrecisionReport()
    token = _report.set(report)
    try:
        yield report
    finally:
        _report.reset(token)


# ---------------------------------------------------------------------------
# MPFR contexts with directed rounding
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _down(prec: int) -> gmpy2.context:
    return gmpy2.context(precision=prec, round=gmpy2.RoundDown)


@lru_cache(maxsize=None)
def _up(prec: int) -> gmpy2.context:
    return gmpy2.context(precision=prec, round=gmpy2.RoundUp)


_ZERO = mpfr(0)


def _round(ctx: gmpy2.context, value) -> mpfr:
    """Round an exact int/mpz/mpq/mpfr into ``ctx``."""
    if isinstance(value, Fraction):
        value = mpq(value.numerator, value.denominator)
    elif isinstance(value, int):
        value = mpz(value)
    return ctx.add(value, _ZERO)


def to_fraction(x: mpfr) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


class Interval:
    """Closed interval with MPFR endpoints; ``lo <= hi`` always."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: mpfr, hi: mpfr):
        if not (lo <= hi):
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def exact(cls, value: Number, prec: int) -> "Interval":
        return cls(_round(_down(prec), value), _round(_up(prec), value))

    @classmethod
    def point(cls, value: mpfr) -> "Interval":
        return cls(value, value)

    def __repr__(self):
        return f"Interval({self.lo!s}, {self.hi!s})"

    def __eq__(self, other):
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    @property
    def width(self) -> mpfr:
        return _up(max(self.lo.precision, self.hi.precision) + 2).sub(self.hi, self.lo)

    @property
    def midpoint(self) -> Fraction:
        return (to_fraction(self.lo) + to_fraction(self.hi)) / 2

    def contains(self, value) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, Fraction):
            return to_fraction(self.lo) <= value <= to_fraction(self.hi)
        return self.lo <= value <= self.hi

    __contains__ = contains

    def intersects(self, other: "Interval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def intersection(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def fractions(self) -> tuple[Fraction, Fraction]:
        return to_fraction(self.lo), to_fraction(self.hi)

    def __float__(self):
        return float(self.midpoint)


def _negate(x: mpfr) -> mpfr:
    # exact at the operand's own precision; plain ``-x`` would round to the global context
    return _down(max(x.precision, 2)).sub(_ZERO, x)


def i_neg(a: Interval) -> Interval:
    return Interval(_negate(a.hi), _negate(a.lo))


def i_abs(a: Interval) -> Interval:
    if a.lo >= 0:
        return a
    if a.hi <= 0:
        return i_neg(a)
    return Interval(_ZERO, max(_negate(a.lo), a.hi))


def i_add(a: Interval, b: Interval, prec: int) -> Interval:
    return Interval(_down(prec).add(a.lo, b.lo), _up(prec).add(a.hi, b.hi))


def i_sub(a: Interval, b: Interval, prec: int) -> Interval:
    return Interval(_down(prec).sub(a.lo, b.hi), _up(prec).sub(a.hi, b.lo))


def i_mul(a: Interval, b: Interval, prec: int) -> Interval:
    d, u = _down(prec), _up(prec)
    corners = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(min(d.mul(x, y) for x, y in corners), max(u.mul(x, y) for x, y in corners))


def i_div(a: Interval, b: Interval, prec: int) -> Interval:
    if b.lo <= 0 <= b.hi:
        raise ZeroDivisionError("divisor interval contains zero")
    d, u = _down(prec), _up(prec)
    corners = ((a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi))
    return Interval(min(d.div(x, y) for x, y in corners), max(u.div(x, y) for x, y in corners))


def i_sqrt(a: Interval, prec: int) -> Interval:
    if a.lo < 0:
        raise DomainError("sqrt of an interval reaching below zero")
    return Interval(_down(prec).sqrt(a.lo), _up(prec).sqrt(a.hi))


def i_exp(a: Interval, prec: int) -> Interval:
    return Interval(_down(prec).exp(a.lo), _up(prec).exp(a.hi))


def i_log(a: Interval, prec: int) -> Interval:
    if a.lo <= 0:
        raise DomainError("log of an interval reaching zero")
    return Interval(_down(prec).log(a.lo), _up(prec).log(a.hi))


def i_pow(x: Interval, y: Interval, prec: int) -> Interval:
    """Enclosure of ``x**y`` for ``x >= 0`` (``y > 0`` when ``x`` touches 0).

    ``x**y`` is monotone in each argument separately on this domain, so
    the extremes sit on the four corners.
    """
    if x.lo < 0:
        raise DomainError("negative base")
    if x.lo == 0 and y.lo <= 0:
        raise DomainError("zero base with non-positive exponent")
    d, u = _down(prec), _up(prec)
    corners = ((x.lo, y.lo), (x.lo, y.hi), (x.hi, y.lo), (x.hi, y.hi))
    return Interval(min(d.pow(b, e) for b, e in corners), max(u.pow(b, e) for b, e in corners))


def i_gamma(a: Interval, prec: int) -> Interval:
    if a.lo < GAMMA_MONOTONE_FROM:
        raise DomainError("gamma is only supported on [3/2, inf)")
    return Interval(_down(prec).gamma(a.lo), _up(prec).gamma(a.hi))


# ---------------------------------------------------------------------------
# Lazily refinable reals
# ---------------------------------------------------------------------------


class Real:
    """A real number known through enclosures at any requested precision.

    Enclosures are cached, and each new one is intersected with the
    tightest cached one, so refining never widens.
    """

    __slots__ = ("_fn", "_cache", "_best", "name")

    def __init__(self, fn: Callable[[int], Interval], name: str | None = None):
        self._fn = fn
        self._cache: dict[int, Interval] = {}
        self._best: Interval | None = None
        self.name = name

    def at(self, prec: int) -> Interval:
        hit = self._cache.get(prec)
        if hit is not None:
            return hit
        iv = self._fn(prec)
        if self._best is not None:
            iv = iv.intersection(self._best)
        self._best = iv
        self._cache[prec] = iv
        return iv

    def __repr__(self):
        label = self.name or "Real"
        iv = self.at(64)
        return f"<{label} in [{float(iv.lo):.12g}, {float(iv.hi):.12g}]>"

    def __float__(self):
        return float(self.at(64))

    # -- constructors ----------------------------------------------------

    @classmethod
    def exact(cls, value: Number) -> "Real":
        value = Fraction(value)
        name = str(value) if value.denominator.bit_length() < 64 and value.numerator.bit_length() < 64 else None
        return cls(lambda prec: Interval.exact(value, prec), name=name)

    @classmethod
    def from_interval(cls, iv: Interval) -> "Real":
        """A constant enclosure that cannot be refined further."""
        return cls(lambda prec: iv)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = as_real(other)
        return Real(lambda prec: i_add(self.at(prec), other.at(prec), prec))

    def __radd__(self, other):
        return as_real(other) + self

    def __sub__(self, other):
        other = as_real(other)
        return Real(lambda prec: i_sub(self.at(prec), other.at(prec), prec))

    def __rsub__(self, other):
        return as_real(other) - self

    def __mul__(self, other):
        other = as_real(other)
        return Real(lambda prec: i_mul(self.at(prec), other.at(prec), prec))

    def __rmul__(self, other):
        return as_real(other) * self

    def __truediv__(self, other):
        other = as_real(other)
        return Real(lambda prec: i_div(self.at(prec), other.at(prec), prec))

    def __rtruediv__(self, other):
        return as_real(other) / self

    def __neg__(self):
        return Real(lambda prec: i_neg(self.at(prec)))

    def __abs__(self):
        return Real(lambda prec: i_abs(self.at(prec)))

    def __pow__(self, exponent):
        return pow_real(self, exponent)


def as_real(value) -> Real:
    if isinstance(value, Real):
        return value
    if isinstance(value, (int, Fraction)):
        return Real.exact(value)
    if isinstance(value, Interval):
        return Real.from_interval(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Real")


def sqrt(x) -> Real:
    x = as_real(x)
    return Real(lambda prec: i_sqrt(x.at(prec), prec))


def exp(x) -> Real:
    x = as_real(x)
    return Real(lambda prec: i_exp(x.at(prec), prec))


def log(x) -> Real:
    x = as_real(x)
    return Real(lambda prec: i_log(x.at(prec), prec))


def gamma(x) -> Real:
    x = as_real(x)
    return Real(lambda prec: i_gamma(x.at(prec), prec))


def pow_real(x, p) -> Real:
    """``x**p`` for ``x >= 0``; the exponent may be exact or a Real."""
    x, p = as_real(x), as_real(p)
    return Real(lambda prec: i_pow(x.at(prec), p.at(prec), prec))


pow_interval = pow_real


def quasinorm(x, y, p) -> Real:
    """``(|x|^p + |y|^p)^(1/p)``."""
    x, y, p = as_real(x), as_real(y), as_real(p)
    return pow_real(pow_real(abs(x), p) + pow_real(abs(y), p), 1 / p)


def stretched_quasinorm(x, y, p, t) -> Real:
    """``F_t(x, y) = F(x / t, t * y)`` written as ``(t^-p |x|^p + t^p |y|^p)^(1/p)``."""
    x, y, p, t = as_real(x), as_real(y), as_real(p), as_real(t)
    tp = pow_real(t, p)
    inner = pow_real(abs(x), p) / tp + tp * pow_real(abs(y), p)
    return pow_real(inner, 1 / p)


F = quasinorm
F_t = stretched_quasinorm


# ---------------------------------------------------------------------------
# Verified decisions
# ---------------------------------------------------------------------------


def cmp(a, b, policy: PrecisionPolicy = DEFAULT_POLICY) -> Ordering:
    """Decide ``a < b`` or ``a > b``, refining both until they separate."""
    a, b = as_real(a), as_real(b)
    report = _report.get()
    first = True
    for bits in policy.schedule():
        if report is not None:
            report.max_bits_used = max(report.max_bits_used, bits)
            if not first:
                report.escalations += 1
        first = False
        ia, ib = a.at(bits), b.at(bits)
        if ia.hi < ib.lo:
            verdict = Ordering.LT
            break
        if ia.lo > ib.hi:
            verdict = Ordering.GT
            break
    else:
        if report is not None:
            report.undecidable += 1
        raise UndecidableComparison(
            f"could not separate {a!r} and {b!r} at {policy.max_bits} bits"
        )
    if report is not None:
        report.comparisons += 1
    return verdict


def less(a, b, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    return cmp(a, b, policy) is Ordering.LT


def sign(x, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    return cmp(x, 0, policy).value


def certified_floor(x, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Floor of an irrational ``x``; raises if ``x`` sits on an integer."""
    x = as_real(x)
    for bits in policy.schedule():
        iv = x.at(bits)
        flo, fhi = iv.fractions()
        lo, hi = math.floor(flo), math.floor(fhi)
        if lo == hi and flo != lo:
            return lo
    raise UndecidableComparison(f"cannot certify floor of {x!r} at {policy.max_bits} bits")


def enclose(x, bits: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Interval:
    """Enclosure of ``x`` with absolute width at most ``2**(2 - bits)``."""
    x = as_real(x)
    target = Fraction(1, 2 ** (bits - 2))
    prec = max(bits + 8, policy.initial_bits)
    limit = max(policy.max_bits, bits + 8)
    while True:
        iv = x.at(prec)
        lo, hi = iv.fractions()
        if hi - lo <= target:
            return iv
        if prec >= limit:
            raise UndecidableComparison(f"cannot reach width 2^-{bits - 2} within {limit} bits")
        prec = min(prec * policy.escalation_factor, limit)


def integer_in(x, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """The unique integer inside the enclosures of ``x``, once they are thin enough."""
    x = as_real(x)
    for bits in policy.schedule():
        iv = x.at(bits)
        flo, fhi = iv.fractions()
        lo, hi = math.ceil(flo), math.floor(fhi)
        if lo > hi:
            raise ValueError(f"{x!r} encloses no integer")
        if lo == hi and fhi - flo < 1:
            return lo
    raise UndecidableComparison(f"cannot isolate an integer in {x!r}")
