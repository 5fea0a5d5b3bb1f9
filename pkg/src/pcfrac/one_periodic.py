"""Thresholds for the one-periodic numbers ``alpha = (a + sqrt(a^2 + 4)) / 2``.

Here ``R_0 = 0``, ``R_1 = 1``, ``R_n = a R_{n-1} + R_{n-2}``, the regular
convergents are ``R_{n+2} / R_{n+1}`` and ``|R_{n+1} - R_n alpha| = alpha^-n``.
The points ``Q_n = (R_n, alpha^-n)`` are the lattice points of the regular
convergents, up to reflection in the x-axis.

``p(m)`` is the exponent at which ``Q_m`` and ``Q_{m+1}`` reach the ball
around ``(0, 1)`` at the same stretch: just below it the first
p-convergent is ``p_m / q_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .alpha import IrrationalSpec, Surd
from .engine import expand
from .numerics import (
    DEFAULT_POLICY,
    Interval,
    Ordering,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    as_real,
    cmp,
    enclose,
    exp,
    less,
    log,
    pow_real,
)
from .mordell import Bisection
from .oracle import brute_best_approximations
from .regular_cf import lattice_y


class PeriodicAlpha:
    """``alpha = [a; a, a, ...]`` with its ``R`` sequence, extended lazily."""

    def __init__(self, a: int):
        if int(a) != a or a < 1:
            raise ValueError("a must be a positive integer")
        self.a = int(a)
        self.spec = IrrationalSpec(Surd(self.a, 1, self.a * self.a + 4, 2))
        self.value: Real = self.spec.real()
        self.log_value: Real = log(self.value)
        self._R = [0, 1]

    def __repr__(self):
        return f"PeriodicAlpha({self.a})"

    def R(self, n: int) -> int:
        if n < 0:
            raise IndexError(n)
        while len(self._R) <= n:
            self._R.append(self.a * self._R[-1] + self._R[-2])
        return self._R[n]

    def R_closed_form(self, n: int) -> Real:
        """``(alpha^n - (-alpha)^-n) / (alpha + 1/alpha)``."""
        x = self.value
        return (pow_real(x, n) - (-1) ** n * pow_real(x, -n)) / (x + 1 / x)

    def Q(self, n: int) -> tuple[int, Real]:
        return self.R(n), abs(lattice_y(self.R(n + 1), self.R(n), self.value))

    def neg_power(self, e) -> Real:
        """``alpha^-e`` for a real exponent ``e``."""
        return exp(-as_real(e) * self.log_value)

    def convergent(self, n: int) -> Fraction:
        """Regular convergent ``p_n / q_n = R_{n+2} / R_{n+1}``."""
        return Fraction(self.R(n + 2), self.R(n + 1))


def _as_alpha(a) -> PeriodicAlpha:
    return a if isinstance(a, PeriodicAlpha) else PeriodicAlpha(a)


def theta_identity(a, n: int, bits: int = 64) -> tuple[Interval, Interval]:
    """Enclosures of ``|R_{n+1} - R_n alpha|`` and ``alpha^-n``, each of width ``<= 2^-bits``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    al = _as_alpha(a)
    lhs = enclose(al.Q(n)[1], bits + 2)
    rhs = enclose(pow_real(al.value, -n), bits + 2)
    return lhs, rhs


def threshold_ratio(a, m: int, p) -> Real:
    """``f(p) = (1 - alpha^(-mp-p)) / (1 - alpha^(-mp))``."""
    al = _as_alpha(a)
    p = as_real(p)
    return (1 - al.neg_power((m + 1) * p)) / (1 - al.neg_power(m * p))


def threshold_residual(a, m: int):
    """``h(p) = log f(p) / p - log(R_{m+1} / R_m)``; strictly decreasing in ``p``."""
    al = _as_alpha(a)
    target = log(Fraction(al.R(m + 1), al.R(m)))

    def h(p: Fraction) -> Real:
        return log(threshold_ratio(al, m, p)) / p - target

    return h


def _pm_bisection(a, m: int, policy: PrecisionPolicy) -> Bisection:
    if m < 3:
        raise ValueError("m must be >= 3")
    h = threshold_residual(a, m)
    lo = Fraction(1, 2)
    # h -> +inf as p -> 0+, so halving finds a positive left end
    while cmp(h(lo), 0, policy) is not Ordering.GT:
        lo /= 2
    return Bisection(h, lo, Fraction(1), policy)


def solve_pm(a, m: int, target_width=Fraction(1, 2**64), policy: PrecisionPolicy = DEFAULT_POLICY) -> Interval:
    """Enclosure of the unique ``p(m)`` in (0, 1) with ``(R_{m+1}/R_m)^p = f(p)``."""
    return _pm_bisection(a, m, policy).interval(Fraction(target_width))


def pm_real(a, m: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    r = _pm_bisection(a, m, policy).real()
    r.name = f"p({m})"
    return r


def pm_asymptotic(a, m: int) -> Real:
    """``log 2 / (m log alpha) * (1 - 1/(2m))``."""
    if m < 3:
        raise ValueError("m must be >= 3")
    al = _as_alpha(a)
    return log(2) / (m * al.log_value) * (1 - Fraction(1, 2 * m))


def _admissibility_sides(al: PeriodicAlpha, m: int, p: Real, k: int) -> tuple[Real, Real]:
    lhs = pow_real(Fraction(al.R(m + k), al.R(m)), p)
    rhs = (1 - al.neg_power((m + k) * p)) / (1 - al.neg_power(m * p))
    return lhs, rhs


def admissibility_inequality(a, m: int, p, k: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """Certified truth of ``(R_{m+k}/R_m)^p > (1 - alpha^(-mp-kp)) / (1 - alpha^(-mp))``.

    Raises :class:`UndecidableComparison` at equality, e.g. ``k = 1`` at ``p = p(m)``.
    """
    if k <= -m:
        raise ValueError("need k > -m")
    al = _as_alpha(a)
    lhs, rhs = _admissibility_sides(al, m, as_real(p), k)
    return cmp(lhs, rhs, policy) is Ordering.GT


@dataclass
class AdmissibilityScan:
    a: int
    m: int
    holds: bool
    failures: list[int]
    undecided: list[int]
    checked: list[int]
    tail_from: int | None  # every k >= tail_from holds by monotonicity

    def as_dict(self) -> dict:
        return {
            "a": self.a, "m": self.m, "holds": self.holds, "failures": self.failures,
            "undecided": self.undecided, "k_min": min(self.checked), "k_max": max(self.checked),
            "tail_from": self.tail_from,
        }


def admissibility_scan(a, m: int, p=None, k_limit: int | None = None,
                       policy: PrecisionPolicy = DEFAULT_POLICY) -> AdmissibilityScan:
    """Check every ``k`` in ``(-m, 0)`` and every ``k >= 2``.

    The positive side is finite: its left side grows with ``k`` while its
    right side stays below ``1 / (1 - alpha^(-mp))``, so once the left side
    passes that bound all larger ``k`` hold too.
    """
    al = _as_alpha(a)
    p = pm_real(al, m) if p is None else as_real(p)
    k_limit = k_limit or 8 * m + 64
    failures, undecided, checked = [], [], []

    def check(k: int):
        checked.append(k)
        try:
            if not admissibility_inequality(al, m, p, k, policy):
                failures.append(k)
        except UndecidableComparison:
            undecided.append(k)

    for k in range(-m + 1, 0):
        check(k)
    cap = 1 / (1 - al.neg_power(m * p))
    # the tail probe only decides where to stop, so a near-tie there just moves on to the next k
    probe = PrecisionPolicy(policy.initial_bits, min(policy.max_bits, 4 * policy.initial_bits), policy.escalation_factor)
    tail_from = None
    for k in range(2, k_limit + 1):
        check(k)
        lhs = pow_real(Fraction(al.R(m + k), al.R(m)), p)
        try:
            if less(cap, lhs, probe):
                tail_from = k
                break
        except UndecidableComparison:
            pass
    holds = not failures and not undecided and tail_from is not None
    return AdmissibilityScan(al.a, m, holds, failures, undecided, checked, tail_from)


@dataclass
class ThresholdReport:
    a: int
    m_min: int
    m_max: int
    threshold: int | None  # smallest m0 with every scanned m >= m0 admissible
    failing: list[int]

    def as_dict(self) -> dict:
        return {"a": self.a, "m_min": self.m_min, "m_max": self.m_max,
                "threshold": self.threshold, "failing": self.failing}


def admissibility_threshold(a, m_max: int, m_min: int = 3,
                            policy: PrecisionPolicy = DEFAULT_POLICY) -> ThresholdReport:
    """Empirical "large enough m": scan ``m_min..m_max`` at ``p = p(m)``."""
    al = _as_alpha(a)
    failing = [m for m in range(m_min, m_max + 1) if not admissibility_scan(al, m, policy=policy).holds]
    threshold = max(failing) + 1 if failing else m_min
    if threshold > m_max:
        threshold = None
    return ThresholdReport(al.a, m_min, m_max, threshold, failing)


@dataclass
class Theorem13Report:
    a: int
    m: int
    p_enclosure: Interval = field(repr=False)
    p_below: Fraction
    p_above: Fraction
    first_below: Fraction
    first_above: Fraction
    expected_below: Fraction
    expected_above: Fraction
    oracle_below: Fraction | None
    oracle_above: Fraction | None

    @property
    def ok(self) -> bool:
        return (self.first_below == self.expected_below and self.first_above == self.expected_above
                and self.oracle_below in (None, self.first_below)
                and self.oracle_above in (None, self.first_above))

    def as_dict(self) -> dict:
        return {
            "a": self.a, "m": self.m,
            "p_below": self.p_below, "p_above": self.p_above,
            "first_below": self.first_below, "first_above": self.first_above,
            "expected_below": self.expected_below, "expected_above": self.expected_above,
            "oracle_below": self.oracle_below, "oracle_above": self.oracle_above,
            "ok": self.ok,
        }


def theorem13_check(a, m: int, delta=Fraction(1, 10**6), oracle_s_max: int | None = 1 << 18,
                    policy: PrecisionPolicy = DEFAULT_POLICY) -> Theorem13Report:
    """First p-convergent on either side of ``p(m)``.

    Expected: ``p_m/q_m`` just below ``p(m)`` and ``p_{m-1}/q_{m-1}`` just
    above. The brute-force oracle checks both. Its certified region covers
    the first convergent once ``s_max^p`` exceeds that convergent's crossing
    ``t^(2p)``, which sizes ``s_max``; above ``oracle_s_max`` (or when it
    is None) the oracle entry is None.
    """
    al = _as_alpha(a)
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    iv = solve_pm(al, m, policy=policy)
    lo, hi = iv.fractions()
    p_below, p_above = lo - delta, hi + delta
    below = expand(al.spec, p_below, 1, policy)
    above = expand(al.spec, p_above, 1, policy)

    def oracle_first(exp) -> Fraction | None:
        s_max = max(2000, math.ceil(1.05 * float(exp.w2s[0]) ** (1 / float(exp.p))))
        if oracle_s_max is None or s_max > oracle_s_max:
            return None
        found = brute_best_approximations(al.spec, exp.p, s_max, policy).fractions()
        return found[0] if found else None

    return Theorem13Report(
        a=al.a, m=m, p_enclosure=iv, p_below=p_below, p_above=p_above,
        first_below=below.fractions()[0], first_above=above.fractions()[0],
        expected_below=al.convergent(m), expected_above=al.convergent(m - 1),
        oracle_below=oracle_first(below), oracle_above=oracle_first(above),
    )


def curve_data(a, m: int, p=None, samples: int = 200, ks=range(-3, 4)) -> dict:
    """Plot data: the first-quadrant boundary through ``Q_m`` and the points ``Q_{m+k}``.

    The curve is ``t^p = (x/t)^p + (t y)^p`` with
    ``t^(2p) = R_m^p / (1 - alpha^(-mp))``. Floating point; for display only.
    """
    al = _as_alpha(a)
    if p is None:
        p = solve_pm(al, m, Fraction(1, 2**40)).midpoint
    pf = float(p)
    alpha = float(al.value)
    t = (al.R(m) ** pf / (1 - alpha ** (-m * pf))) ** (1 / (2 * pf))
    x_end = t * t
    curve = []
    for i in range(samples + 1):
        x = x_end * i / samples
        rest = max(t**pf - (x / t) ** pf, 0.0)
        curve.append((x, rest ** (1 / pf) / t))
    points = [(k, al.R(m + k), alpha ** (-(m + k))) for k in ks if m + k >= 0]
    return {"p": Fraction(p), "t": t, "curve": curve, "points": points}


def D_ell_periodic(a: int, ell: int) -> int:
    """``D_ell`` from ``D_0 = 1``, ``D_1 = a``, ``D_k = a D_{k-1} + D_{k-2}``; equals ``R_{ell+1}``."""
    d2, d1 = 1, a
    if ell == 0:
        return 1
    for _ in range(ell - 1):
        d2, d1 = d1, a * d1 + d2
    return d1


def asymptotic_ratio(a, m: int) -> float:
    """``m p(m) log(alpha) / log 2``, which tends to 1."""
    al = _as_alpha(a)
    p = solve_pm(al, m, Fraction(1, 2**40)).midpoint
    return m * float(p) * math.log(float(al.value)) / math.log(2)
