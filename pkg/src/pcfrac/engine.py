"""The p-continued fraction for 0 < p < 1.

Starting from the point (0, 1) of the lattice ``L_alpha = {(s, r - s*alpha)}``
and stretch ``t = 1``, the ball ``{P : F_t(P) < F_t(P_prev)}`` is inflated by
increasing ``t`` until a lattice point reaches its boundary; that point (the
one with the largest ``s`` on a tie) becomes the next convergent.

For a candidate ``Q`` to the right of and below ``P_prev`` the boundary is
reached when

    t^(2p) = (s_Q^p - s_prev^p) / (|y_prev|^p - |y_Q|^p),

which is increasing in both ``s_Q`` and ``|y_Q|``. Every lattice point is
therefore dominated by a regular convergent, so only regular convergents are
scanned.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .alpha import IrrationalSpec, ReducedAlpha, as_spec, reduce
from .mordell import MordellConstants, constants
from .numerics import (
    DEFAULT_POLICY,
    Ordering,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    as_real,
    cmp,
    integer_in,
    less,
    pow_real,
)
from .regular_cf import InvariantViolation, RegularExpansion, expand_regular, index_of, lattice_y

log = logging.getLogger(__name__)

Exponent = Union[Fraction, Real]


class WindowExhausted(RuntimeError):
    """The candidate scan ran past its window without certifying the next point."""


@dataclass(frozen=True)
class LatticePoint:
    s: int
    r: int
    y: Real = field(compare=False, repr=False)
    index: int | None = None

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.r, self.s)


SEED = LatticePoint(0, 1, Real.exact(1), None)


def _pow(x, p: Exponent) -> Real:
    return pow_real(x, p)


def crossing_w2(prev: LatticePoint, cand: LatticePoint, p: Exponent) -> Real:
    """``t^(2p)`` at which ``cand`` reaches the boundary of the ball through ``prev``."""
    num = _pow(cand.s, p) - (_pow(prev.s, p) if prev.s else 0)
    den = _pow(abs(prev.y), p) - _pow(abs(cand.y), p)
    return num / den


def crossing_t(prev: LatticePoint, cand: LatticePoint, p: Exponent, t_floor=None,
               policy: PrecisionPolicy = DEFAULT_POLICY) -> Real | None:
    """Stretch ``t`` with ``F_t(prev) = F_t(cand)``.

    Returns None when that ``t`` is certified below ``t_floor``: the
    candidate would already be inside an earlier ball.
    """
    if not cand.s > prev.s >= 0:
        raise ValueError("candidate must lie strictly to the right of the previous point")
    if not less(abs(cand.y), abs(prev.y), policy):
        raise ValueError("candidate must lie strictly closer to the axis than the previous point")
    t = pow_real(crossing_w2(prev, cand, p), 1 / (2 * as_real(p)))
    if t_floor is not None and cmp(t, t_floor, policy) is Ordering.LT:
        return None
    return t


class RegularCandidates:
    """Lattice points of the regular convergents, extended on demand."""

    def __init__(self, spec: IrrationalSpec, policy: PrecisionPolicy = DEFAULT_POLICY, initial: int = 32):
        self.spec = spec
        self.policy = policy
        self.alpha = spec.real()
        self.regular = expand_regular(spec, initial, policy)
        self._points: dict[int, LatticePoint] = {}

    def _ensure(self, k: int):
        n = len(self.regular)
        while k >= n:
            n *= 2
        if n != len(self.regular):
            self.regular = expand_regular(self.spec, n, self.policy)

    def q(self, k: int) -> int:
        self._ensure(k)
        return self.regular.q[k]

    def point(self, k: int) -> LatticePoint:
        pt = self._points.get(k)
        if pt is None:
            self._ensure(k)
            r, s = self.regular.p[k], self.regular.q[k]
            pt = LatticePoint(s, r, lattice_y(r, s, self.alpha), k)
            self._points[k] = pt
        return pt


@dataclass
class Step:
    point: LatticePoint
    w2: Real
    scanned: int
    tie: bool = False


def next_convergent(prev: LatticePoint, w2_prev: Real, cands: RegularCandidates, start: int,
                    consts: MordellConstants, p: Exponent, policy: PrecisionPolicy = DEFAULT_POLICY,
                    tie_break: bool = False) -> Step:
    """Find the first regular-convergent point to reach the inflating ball.

    Candidates are scanned from regular index ``start``. The scan stops once
    the best crossing found is certified below the smallest crossing any
    later candidate could have, which is ``(q_{k+1}^p - s_prev^p) / |y_prev|^p``.
    """
    window = 2 * (consts.ell_max + 2)
    base_prev = _pow(prev.s, p) if prev.s else 0
    y_prev_p = _pow(abs(prev.y), p)
    best: LatticePoint | None = None
    best_w2: Real | None = None
    tie = False
    k = start
    while True:
        if k - start >= window:
            raise WindowExhausted(
                f"no certified next convergent within {window} regular indices after {prev.r}/{prev.s}"
            )
        cand = cands.point(k)
        if cand.s > prev.s and less(abs(cand.y), abs(prev.y), policy):
            w2 = crossing_w2(prev, cand, p)
            if best is None:
                best, best_w2 = cand, w2
            else:
                try:
                    order = cmp(w2, best_w2, policy)
                except UndecidableComparison:
                    if not tie_break:
                        raise
                    # exact tie assumed: the point with maximal s wins
                    log.warning("tie between %s/%s and %s/%s broken by maximal s", best.r, best.s, cand.r, cand.s)
                    order, tie = Ordering.LT, True
                if order is Ordering.LT:
                    best, best_w2 = cand, w2
        if best is not None:
            bound = (_pow(cands.q(k + 1), p) - base_prev) / y_prev_p
            try:
                if less(best_w2, bound, policy):
                    break
            except UndecidableComparison:
                pass
        k += 1
    if not less(w2_prev, best_w2, policy):
        raise InvariantViolation(f"crossing for {best.r}/{best.s} does not exceed the previous one")
    return Step(best, best_w2, k - start + 1, tie)


@dataclass(frozen=True)
class PcfExpansion:
    alpha: ReducedAlpha
    p: Exponent
    a0: Fraction
    terms: tuple[tuple[int, int], ...]
    convergents: tuple[tuple[int, int], ...]
    dets: tuple[int, ...]
    t_ms: tuple[Real, ...] = field(repr=False)
    w2s: tuple[Real, ...] = field(repr=False)
    regular_indices: tuple[int, ...]
    ties: tuple[int, ...] = ()

    def fractions(self) -> list[Fraction]:
        return [Fraction(r, s) for r, s in self.convergents]

    def points(self) -> list[LatticePoint]:
        alpha = self.alpha.spec.real()
        return [LatticePoint(s, r, lattice_y(r, s, alpha), k)
                for (r, s), k in zip(self.convergents, self.regular_indices)]


def _coefficients(conv: Sequence[tuple[int, int]]) -> tuple[list[int], list[tuple[int, int]]]:
    """Determinants ``det g_m`` and integer terms ``(eps_m, a_m)``.

    With ``y = r - s*alpha`` the alpha terms cancel in every 2x2 minor of the
    ``g`` matrices, so all of this is exact integer arithmetic. ``g_0`` has
    the virtual previous row ``(s, r) = (0, s_0)``.
    """
    r0, s0 = conv[0]
    rows = [(s0, 0)] + [(r, s) for r, s in conv]  # rows[m + 1] is P_m; rows[0] is the virtual P_-1

    def minor(i: int, j: int) -> int:
        (ri, si), (rj, sj) = rows[i + 1], rows[j + 1]
        return si * rj - sj * ri

    dets = [s0 * s0] + [minor(m, m - 1) for m in range(1, len(conv))]
    terms = []
    for m in range(1, len(conv)):
        a_m = minor(m, m - 2)  # det(g_{m-1}) * a~_m
        eps_m = -dets[m] if m == 1 else -dets[m - 2] * dets[m]
        terms.append((eps_m, a_m))
    return dets, terms


def expand(alpha, p, n_terms: int, policy: PrecisionPolicy = DEFAULT_POLICY,
           consts: MordellConstants | None = None, tie_break: bool = False) -> PcfExpansion:
    """First ``n_terms`` convergents of the p-continued fraction of ``alpha``.

    ``p`` is normally an exact rational. A :class:`Real` exponent is accepted
    for probing exact ties; then ``consts`` (or a rational proxy for sizing
    the scan window) comes from a point inside its enclosure.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if isinstance(p, Real):
        exponent: Exponent = p
        if consts is None:
            consts = constants(p.at(64).midpoint.limit_denominator(2**40), policy=policy)
    else:
        exponent = Fraction(p)
        if consts is None:
            consts = constants(exponent, policy=policy)
    spec = as_spec(alpha)
    reduced = reduce(spec, policy)
    cands = RegularCandidates(spec, policy)

    prev, w2_prev, start = SEED, Real.exact(1), 0
    points: list[LatticePoint] = []
    w2s: list[Real] = []
    ties: list[int] = []
    for m in range(n_terms):
        step = next_convergent(prev, w2_prev, cands, start, consts, exponent, policy, tie_break)
        if step.tie:
            ties.append(m)
        prev, w2_prev = step.point, step.w2
        start = step.point.index + 1
        points.append(step.point)
        w2s.append(step.w2)

    conv = tuple((pt.r, pt.s) for pt in points)
    dets, terms = _coefficients(conv)
    half_over_p = 1 / (2 * as_real(exponent))
    return PcfExpansion(
        alpha=reduced,
        p=exponent,
        a0=Fraction(*conv[0]),
        terms=tuple(terms),
        convergents=conv,
        dets=tuple(dets),
        t_ms=tuple(pow_real(w2, half_over_p) for w2 in w2s),
        w2s=tuple(w2s),
        regular_indices=tuple(pt.index for pt in points),
        ties=tuple(ties),
    )


def convergents_from_terms(a0: Fraction, terms: Sequence[tuple]) -> list[Fraction]:
    """Evaluate ``a0 + eps_1/(a_1 + eps_2/(a_2 + ...))`` prefix by prefix, exactly."""
    a0 = Fraction(a0)
    A2, A1 = Fraction(1), a0
    B2, B1 = Fraction(0), Fraction(1)
    out = [a0]
    for eps, a in terms:
        A2, A1 = A1, a * A1 + eps * A2
        B2, B1 = B1, a * B1 + eps * B2
        out.append(A1 / B1)
    return out


def transform_cf(terms: Sequence[tuple], rhos: Sequence) -> list[tuple[Fraction, Fraction]]:
    """``(eps_m, a_m) -> (rho_{m-1} rho_m eps_m, rho_m a_m)`` with ``rho_0 = 1``.

    Leaves every convergent unchanged.
    """
    if len(rhos) != len(terms):
        raise ValueError("need one rho per term")
    out = []
    rho_prev = Fraction(1)
    for (eps, a), rho in zip(terms, rhos):
        rho = Fraction(rho)
        if rho == 0:
            raise ZeroDivisionError("rho must be nonzero")
        out.append((rho_prev * rho * eps, rho * a))
        rho_prev = rho
    return out


def gcd_normalizing_rhos(terms: Sequence[tuple[int, int]]) -> list[Fraction]:
    """``rho_m`` dividing out ``gcd(eps_m, a_m, eps_{m+1})`` after the earlier rescalings."""
    rhos = []
    rho_prev = Fraction(1)
    for m, (eps, a) in enumerate(terms):
        eps_now = rho_prev * eps
        parts = [int(eps_now), int(a)]
        if m + 1 < len(terms):
            parts.append(int(terms[m + 1][0]))
        g = math.gcd(*parts)
        rho = Fraction(1, g)
        rhos.append(rho)
        rho_prev = rho
    return rhos


def gcd_normalize(terms: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    out = transform_cf(terms, gcd_normalizing_rhos(terms))
    return [(int(e), int(a)) for e, a in out]


def skip_profile(exp: PcfExpansion, regular: RegularExpansion | None = None) -> list[int]:
    """Regular-index gaps between consecutive p-convergents."""
    if regular is None:
        last = max(exp.regular_indices)
        regular = expand_regular(exp.alpha.spec, last + 1)
    idx = []
    for r, s in exp.convergents:
        n = index_of(regular, r, s)
        if n is None:
            raise InvariantViolation(f"p-convergent {r}/{s} is not a regular convergent")
        idx.append(n)
    return [b - a for a, b in zip(idx, idx[1:])]


def check_invariants(exp: PcfExpansion, consts: MordellConstants,
                     policy: PrecisionPolicy = DEFAULT_POLICY) -> list[str]:
    """Human-readable list of violated properties (empty when all hold)."""
    problems: list[str] = []
    conv = exp.convergents
    if convergents_from_terms(exp.a0, exp.terms) != exp.fractions():
        problems.append("terms do not reproduce the convergents")
    pts = exp.points()
    for m in range(1, len(pts)):
        if not pts[m].s > pts[m - 1].s:
            problems.append(f"s not increasing at m={m}")
        if not less(abs(pts[m].y), abs(pts[m - 1].y), policy):
            problems.append(f"|y| not decreasing at m={m}")
        det_real = pts[m].s * pts[m - 1].y - pts[m - 1].s * pts[m].y
        if integer_in(det_real, policy) != exp.dets[m]:
            problems.append(f"det g_{m} interval does not isolate {exp.dets[m]}")
        if not less(abs(exp.dets[m]), consts.det_bound, policy):
            problems.append(f"|det g_{m}| = {abs(exp.dets[m])} exceeds the determinant bound")
    for m, (eps, a) in enumerate(exp.terms, start=1):
        if not less(abs(eps), consts.eps_bound_Mp, policy) and abs(eps) != 0:
            problems.append(f"|eps_{m}| = {abs(eps)} exceeds the partial numerator bound")
    for m in range(1, len(exp.w2s)):
        if not less(exp.w2s[m - 1], exp.w2s[m], policy):
            problems.append(f"t not increasing at m={m}")
    for (r, s) in conv:
        coeff = s * abs(lattice_y(r, s, exp.alpha.spec.real()))
        if not less(coeff, consts.gm_bound, policy):
            problems.append(f"approximation coefficient of {r}/{s} not below 4^(-1/p) beta_p")
    gaps = skip_profile(exp)
    if gaps and max(gaps) > consts.ell_max:
        problems.append(f"skip gap {max(gaps)} exceeds ell_max = {consts.ell_max}")
    return problems


def ball_boundary(center: LatticePoint, t: Real, p: Fraction, samples: int = 200) -> list[tuple[float, float]]:
    """Sampled boundary of ``{P : F_t(P) < F_t(center)}`` (plot data, floating point)."""
    tf, pf = float(t), float(p)
    radius_p = (center.s / tf) ** pf + (tf * abs(float(center.y))) ** pf
    xmax = tf * radius_p ** (1 / pf)
    quadrant = []
    for i in range(samples + 1):
        x = xmax * i / samples
        rest = max(radius_p - (x / tf) ** pf, 0.0)
        quadrant.append((x, rest ** (1 / pf) / tf))
    out = []
    for sx, sy in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
        pts = [(sx * x, sy * y) for x, y in quadrant]
        out.extend(pts if sx * sy > 0 else pts[::-1])
    return out
