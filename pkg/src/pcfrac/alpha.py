"""Target irrationals: parsing, exact quadratic forms and reduction to (-1/2, 1/2)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import gmpy2

from .numerics import (
    DEFAULT_POLICY,
    Interval,
    PrecisionPolicy,
    Real,
    _down,
    _up,
    certified_floor,
    enclose,
    i_add,
    i_div,
    i_mul,
    i_sqrt,
)


_HALF = Fraction(1, 2)


class AlphaParseError(ValueError):
    pass


class RationalInputError(AlphaParseError):
    """The described number is rational (or the description is degenerate)."""


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class Surd:
    """``(A + B*sqrt(D)) / C``."""

    A: int
    B: int
    D: int
    C: int

    def __post_init__(self):
        if self.C == 0:
            raise RationalInputError("denominator C must be nonzero")
        if self.D <= 0 or _is_square(self.D):
            raise RationalInputError(f"D = {self.D} is a perfect square or not positive: the number is rational")
        if self.B == 0:
            raise RationalInputError("B = 0: the number is rational")

    def text(self) -> str:
        sign = "+" if self.B >= 0 else "-"
        return f"surd:({self.A}{sign}{abs(self.B)}*sqrt({self.D}))/{self.C}"

    def surd(self) -> "Surd":
        return self

    def real(self) -> Real:
        A, B, D, C = self.A, self.B, self.D, self.C

        def enclosure(prec: int) -> Interval:
            root = i_sqrt(Interval.exact(D, prec), prec)
            num = i_add(Interval.exact(A, prec), i_mul(Interval.exact(B, prec), root, prec), prec)
            return i_div(num, Interval.exact(C, prec), prec)

        return Real(enclosure, name=self.text())

    def normalized(self) -> "Surd":
        """Pull square factors out of D, cancel common factors, make C > 0."""
        A, B, D, C = self.A, self.B, self.D, self.C
        f = 2
        while f * f <= D and f < 10**4:
            while D % (f * f) == 0:
                D //= f * f
                B *= f
            f += 1
        g = math.gcd(math.gcd(A, B), C)
        A, B, C = A // g, B // g, C // g
        if C < 0:
            A, B, C = -A, -B, -C
        return Surd(A, B, D, C)


@dataclass(frozen=True)
class PeriodicCF:
    """``[preperiod..., (period...)]``; the period repeats forever."""

    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(b) for b in self.preperiod))
        object.__setattr__(self, "period", tuple(int(c) for c in self.period))
        if not self.period:
            raise RationalInputError("period must be nonempty: a terminating continued fraction is rational")
        tail = self.preperiod[1:] + self.period
        if any(c < 1 for c in tail) or (not self.preperiod and self.period[0] < 1):
            raise AlphaParseError("partial quotients after the leading term must be >= 1")

    def text(self) -> str:
        per = "(" + ",".join(map(str, self.period)) + ")"
        if not self.preperiod:
            return f"cf:[{per}]"
        head, *rest = self.preperiod
        return f"cf:[{head};" + ",".join([*map(str, rest), per]) + "]"

    def quotients(self):
        """Infinite stream of declared partial quotients."""
        yield from self.preperiod
        while True:
            yield from self.period

    def surd(self) -> Surd:
        # purely periodic tail y = [c1; ..., cm, y] is a fixed point of a Mobius map
        P, Pp, Q, Qp = 1, 0, 0, 1
        for c in self.period:
            P, Pp, Q, Qp = c * P + Pp, P, c * Q + Qp, Q
        # y = (P y + Pp) / (Q y + Qp)  =>  Q y^2 + (Qp - P) y - Pp = 0, larger root
        disc = (Qp - P) ** 2 + 4 * Q * Pp
        X, Z = P - Qp, 2 * Q
        U, Up, V, Vp = 1, 0, 0, 1
        for b in self.preperiod:
            U, Up, V, Vp = b * U + Up, U, b * V + Vp, V
        # alpha = (U y + Up) / (V y + Vp) with y = (X + sqrt(disc)) / Z; rationalize
        n0, d0 = U * X + Up * Z, V * X + Vp * Z
        A = n0 * d0 - U * V * disc
        B = Z * (U * Vp - Up * V)
        C = d0 * d0 - V * V * disc
        return Surd(A, B, disc, C).normalized()

    def real(self) -> Real:
        r = self.surd().real()
        r.name = self.text()
        return r


@dataclass(frozen=True)
class Named:
    constant: str

    def __post_init__(self):
        if self.constant not in ("e", "phi"):
            raise AlphaParseError(f"unknown constant {self.constant!r}")

    def text(self) -> str:
        return self.constant

    def surd(self) -> Surd | None:
        return Surd(1, 1, 5, 2) if self.constant == "phi" else None

    def real(self) -> Real:
        if self.constant == "phi":
            r = Surd(1, 1, 5, 2).real()
            r.name = "phi"
            return r
        one = gmpy2.mpfr(1)
        return Real(lambda prec: Interval(_down(prec).exp(one), _up(prec).exp(one)), name="e")


Base = Union[Surd, PeriodicCF, Named]


@dataclass(frozen=True)
class IrrationalSpec:
    """``(-1)^negate * base + shift``."""

    base: Base
    negate: bool = False
    shift: int = 0

    def text(self) -> str:
        out = ("neg:" if self.negate else "") + self.base.text()
        if self.shift:
            out += f"{self.shift:+d}"
        return out

    __str__ = text

    def surd(self) -> Surd | None:
        s = self.base.surd()
        if s is None:
            return None
        sign = -1 if self.negate else 1
        return Surd(sign * s.A + self.shift * s.C, sign * s.B, s.D, s.C).normalized()

    def real(self) -> Real:
        r = self.base.real()
        if self.negate:
            r = -r
        if self.shift:
            r = r + self.shift
        r.name = self.text()
        return r


_INT = r"[+-]?\d+"
_SURD_RE = re.compile(
    rf"surd:\(\s*(?P<A>{_INT})\s*(?P<sign>[+-])\s*(?P<B>{_INT})\s*\*\s*sqrt\(\s*(?P<D>{_INT})\s*\)\s*\)\s*/\s*(?P<C>{_INT})"
)
_CF_RE = re.compile(r"cf:\[(?P<body>[^\]]*)\]")


def _parse_cf(body: str) -> PeriodicCF:
    body = body.replace(" ", "")
    m = re.fullmatch(r"(?:(?P<head>[+-]?\d+)?;)?(?P<rest>.*)", body)
    head, rest = m.group("head"), m.group("rest")
    pm = re.fullmatch(r"(?P<pre>(?:\d+,)*)\((?P<per>\d+(?:,\d+)*)\)", rest)
    if pm is None:
        raise AlphaParseError(f"malformed continued fraction body {body!r}")
    pre = [int(x) for x in pm.group("pre").split(",") if x]
    if head is not None:
        pre.insert(0, int(head))
    elif pre:
        raise AlphaParseError("a preperiod needs a leading term followed by ';'")
    period = [int(x) for x in pm.group("per").split(",")]
    return PeriodicCF(tuple(pre), tuple(period))


def parse(text: str) -> IrrationalSpec:
    """Parse ``surd:(A+B*sqrt(D))/C``, ``cf:[b0;b1,...,(c1,...)]``, ``phi`` or ``e``.

    An optional ``neg:`` prefix negates and a trailing ``+k``/``-k`` shifts.
    """
    s = text.strip()
    negate = False
    if s.startswith("neg:"):
        negate, s = True, s[4:]
    shift = 0
    if s.startswith("surd:"):
        m = _SURD_RE.match(s)
        if m is None:
            raise AlphaParseError(f"malformed surd {text!r}")
        B = int(m.group("B")) * (-1 if m.group("sign") == "-" else 1)
        base: Base = Surd(int(m.group("A")), B, int(m.group("D")), int(m.group("C")))
        tail = s[m.end():]
    elif s.startswith("cf:"):
        m = _CF_RE.match(s)
        if m is None:
            raise AlphaParseError(f"malformed continued fraction {text!r}")
        base = _parse_cf(m.group("body"))
        tail = s[m.end():]
    else:
        m = re.match(r"(phi|e)(?![a-z])", s)
        if m is None:
            raise AlphaParseError(f"unrecognized irrational {text!r}")
        base = Named(m.group(1))
        tail = s[m.end():]
    tail = tail.strip()
    if tail:
        if not re.fullmatch(r"[+-]\d+", tail):
            raise AlphaParseError(f"trailing garbage {tail!r} in {text!r}")
        shift = int(tail)
    return IrrationalSpec(base, negate, shift)


def as_spec(alpha) -> IrrationalSpec:
    if isinstance(alpha, IrrationalSpec):
        return alpha
    if isinstance(alpha, str):
        return parse(alpha)
    if isinstance(alpha, (Surd, PeriodicCF, Named)):
        return IrrationalSpec(alpha)
    raise TypeError(f"cannot interpret {alpha!r} as an irrational")


def evaluate(spec, bits: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Interval:
    """Enclosure of the value with width at most ``2**(2 - bits)``."""
    return enclose(as_spec(spec).real(), bits, policy)


@dataclass(frozen=True)
class ReducedAlpha:
    spec: IrrationalSpec
    integer_part_shift: int
    value: Real = field(compare=False, repr=False)

    @property
    def original(self) -> Real:
        return self.value + self.integer_part_shift


def reduce(spec, policy: PrecisionPolicy = DEFAULT_POLICY) -> ReducedAlpha:
    """Shift ``alpha`` by its nearest integer ``k`` so that ``alpha - k`` lies in (-1/2, 1/2)."""
    spec = as_spec(spec)
    x = spec.real()
    k = certified_floor(x + _HALF, policy)
    value = x - k
    value.name = f"{spec.text()} - {k}"
    return ReducedAlpha(spec, k, value)

