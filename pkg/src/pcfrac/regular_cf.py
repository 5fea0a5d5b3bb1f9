"""Regular continued fractions with certified partial quotients."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .alpha import IrrationalSpec, as_spec
from .numerics import (
    DEFAULT_POLICY,
    Interval,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    i_mul,
    i_sub,
)


class InvariantViolation(AssertionError):
    """A property guaranteed by the theory failed at run time (a bug signal)."""


def certified_quotients(lo: Fraction, hi: Fraction, limit: int) -> list[int]:
    """Partial quotients shared by every real in ``[lo, hi]``.

    Runs the Gauss map on both endpoints in exact arithmetic. The set of reals
    with a given prefix of partial quotients is an interval, so a prefix
    common to both endpoints holds for everything between them.
    """
    out: list[int] = []
    x, y = lo, hi
    while len(out) < limit:
        bx, by = x.numerator // x.denominator, y.numerator // y.denominator
        if bx != by:
            break
        fx, fy = x - bx, y - by
        if fx == 0 or fy == 0:
            # an endpoint terminates here; its next quotient is undefined
            break
        out.append(bx)
        x, y = 1 / fx, 1 / fy
    return out


@dataclass(frozen=True)
class RegularExpansion:
    alpha: IrrationalSpec
    b: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]

    def __len__(self):
        return len(self.b)

    def num(self, n: int) -> int:
        """``p_n`` with the seeds ``p_-2 = 0``, ``p_-1 = 1``."""
        if n == -2:
            return 0
        if n == -1:
            return 1
        return self.p[n]

    def den(self, n: int) -> int:
        """``q_n`` with the seeds ``q_-2 = 1``, ``q_-1 = 0``."""
        if n == -2:
            return 1
        if n == -1:
            return 0
        return self.q[n]

    def convergent(self, n: int) -> Fraction:
        return Fraction(self.p[n], self.q[n])

    def first_index(self) -> int:
        """Index of the first convergent with a strictly new denominator.

        ``q_0 = q_1 = 1`` when ``b_1 = 1``; the later of the two is the
        better approximation.
        """
        return 1 if len(self.q) > 1 and self.q[1] == self.q[0] else 0

    def distinct_convergents(self) -> list[Fraction]:
        return [self.convergent(n) for n in range(self.first_index(), len(self))]


def _convergents(b: list[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    p, q = [], []
    p2, p1, q2, q1 = 0, 1, 1, 0
    for bn in b:
        p2, p1 = p1, bn * p1 + p2
        q2, q1 = q1, bn * q1 + q2
        p.append(p1)
        q.append(q1)
    return tuple(p), tuple(q)


@lru_cache(maxsize=256)
def _expand(spec: IrrationalSpec, n_terms: int, policy: PrecisionPolicy) -> RegularExpansion:
    x = spec.real()
    for bits in policy.schedule():
        lo, hi = x.at(bits).fractions()
        b = certified_quotients(lo, hi, n_terms)
        if len(b) >= n_terms:
            p, q = _convergents(b)
            return RegularExpansion(spec, tuple(b), p, q)
    raise UndecidableComparison(
        f"could only certify {len(b)} of {n_terms} partial quotients of {spec.text()} at {policy.max_bits} bits"
    )


def expand_regular(alpha, n_terms: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> RegularExpansion:
    """First ``n_terms`` partial quotients ``b_0..b_{n-1}`` and their convergents.

    Every quotient is certified: on failure the enclosure of ``alpha`` is
    recomputed from scratch at a higher precision.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    return _expand(as_spec(alpha), n_terms, policy)


def lattice_y(r: int, s: int, alpha: Real) -> Real:
    """``r - s*alpha``, evaluating ``alpha`` with enough extra bits to absorb the cancellation."""
    extra = 2 * max(abs(s), 1).bit_length() + 8

    def enclosure(prec: int) -> Interval:
        wp = prec + extra
        return i_sub(Interval.exact(r, wp), i_mul(Interval.exact(s, wp), alpha.at(wp), wp), wp)

    return Real(enclosure)


def approx_coefficient(n: int, exp: RegularExpansion) -> Real:
    """``q_n |p_n - q_n alpha|``."""
    if not 0 <= n < len(exp):
        raise IndexError(n)
    alpha = exp.alpha.real()
    return exp.q[n] * abs(lattice_y(exp.p[n], exp.q[n], alpha))


def D_ell(n: int, ell: int, exp: RegularExpansion) -> int:
    """``(-1)^(n-1) (q_{n-1} p_{n+ell} - p_{n-1} q_{n+ell})``.

    Computed from the determinant and again from the three-term recurrence
    in the partial quotients; the two must agree.
    """
    if n < 0 or ell < 0 or n + ell >= len(exp):
        raise IndexError((n, ell))
    sign = -1 if (n - 1) % 2 else 1
    direct = sign * (exp.den(n - 1) * exp.num(n + ell) - exp.num(n - 1) * exp.den(n + ell))
    if ell == 0:
        rec = 1
    else:
        d2, d1 = 1, exp.b[n + 1]
        for k in range(2, ell + 1):
            d2, d1 = d1, exp.b[n + k] * d1 + d2
        rec = d1
    if rec != direct:
        raise InvariantViolation(f"D_{ell}({n}): determinant {direct} != recurrence {rec}")
    return direct


def index_of(exp: RegularExpansion, r: int, s: int) -> int | None:
    """Index ``n`` with ``p_n/q_n = r/s`` (reduced), or None."""
    for n, (pn, qn) in enumerate(zip(exp.p, exp.q)):
        if qn == s and pn == r:
            return n
        if qn > s:
            break
    return None
