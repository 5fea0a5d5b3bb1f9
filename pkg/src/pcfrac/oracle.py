"""Brute-force L^p best approximations, straight from the definition.

With ``w = t^p`` the p-th power of the stretched quasinorm of a lattice point
``(s, y)`` is ``A/w + B*w`` where ``A = s^p`` and ``B = |y|^p``. Multiplying
by ``w`` and writing ``u = w^2`` turns every point into the line
``u -> A + B*u``, so "strictly smallest for some t > 1" becomes "owns an
open piece of the lower envelope of these lines on u > 1".

The lattice point ``(0, 1)`` takes part as a competitor (it is the envelope
owner just after ``u = 1``) but is never reported, since it is not a
rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .alpha import as_spec
from .engine import LatticePoint, PcfExpansion, SEED
from .numerics import (
    DEFAULT_POLICY,
    Ordering,
    PrecisionPolicy,
    Real,
    UndecidableComparison,
    as_real,
    cmp,
    less,
    pow_real,
    sqrt,
    stretched_quasinorm,
)
from .regular_cf import lattice_y


@dataclass
class EnvelopeEntry:
    point: LatticePoint
    A: Real = field(repr=False)
    B: Real = field(repr=False)
    # ownership of w = t^p: (w_lo, w_hi); w_hi is None for the last owner
    w_lo: Real | None = field(default=None, repr=False)
    w_hi: Real | None = field(default=None, repr=False)

    @property
    def w_interval(self) -> tuple[Real | None, Real | None]:
        return self.w_lo, self.w_hi


@dataclass
class OracleResult:
    p: Fraction
    s_max: int
    envelope: list[EnvelopeEntry]
    horizon_w: Real = field(repr=False)

    @property
    def best(self) -> list[EnvelopeEntry]:
        """Owners with ``s > 0`` whose ownership starts below the horizon."""
        return [e for e in self.envelope if e.point.s > 0]

    def fractions(self) -> list[Fraction]:
        return [e.point.fraction for e in self.best]


def lattice_points(alpha: Real, s_max: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> list[LatticePoint]:
    """All ``(s, r - s*alpha)`` with ``1 <= s <= s_max`` and ``|r - s*alpha| < 1``."""
    out = []
    for s in range(1, s_max + 1):
        iv = alpha.at(policy.initial_bits + 2 * s.bit_length())
        lo, hi = iv.fractions()
        # r ranges over integers within distance 1 of s*alpha
        for r in range(math.floor(s * lo) - 1, math.ceil(s * hi) + 2):
            y = lattice_y(r, s, alpha)
            if less(abs(y), 1, policy):
                out.append(LatticePoint(s, r, y))
    return out


def _crossing_u(left: EnvelopeEntry, right: EnvelopeEntry) -> Real:
    # A_l + B_l u = A_r + B_r u
    return (right.A - left.A) / (left.B - right.B)


def record_points(alpha: Real, s_max: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> list[LatticePoint]:
    """Points of :func:`lattice_points` that set a new minimum of ``|y|`` as ``s`` grows.

    Any other point has a larger ``s`` and a larger ``|y|`` than some record,
    so its cost ``A/w + B*w`` is larger for every ``w``. Columns are swept
    with one exact rational enclosure of ``alpha``; a real comparison is only
    made when two rational enclosures overlap.
    """
    lo, hi = alpha.at(policy.initial_bits + 2 * s_max.bit_length() + 16).fractions()
    best_lo = best_hi = Fraction(1)  # enclosure of the current record |y|
    best: LatticePoint | None = None
    out: list[LatticePoint] = []
    for s in range(1, s_max + 1):
        for r in range(math.floor(s * lo), math.ceil(s * hi) + 1):
            # |r - s*alpha| over alpha in [lo, hi]
            a, b = r - s * hi, r - s * lo
            y_lo, y_hi = (a, b) if a >= 0 else ((-b, -a) if b <= 0 else (Fraction(0), max(-a, b)))
            if y_lo >= best_hi:
                continue
            pt = LatticePoint(s, r, lattice_y(r, s, alpha))
            if y_hi > best_lo and best is not None and not less(abs(pt.y), abs(best.y), policy):
                continue
            if best is not None and best.s == s:
                out.pop()
            out.append(pt)
            best, best_lo, best_hi = pt, y_lo, y_hi
    return out


def lower_envelope(alpha: Real, p: Fraction, s_max: int,
                   policy: PrecisionPolicy = DEFAULT_POLICY) -> list[EnvelopeEntry]:
    """Envelope owners in order of ownership, starting with the point (0, 1)."""
    records = [EnvelopeEntry(SEED, Real.exact(0), Real.exact(1))]
    for pt in record_points(alpha, s_max, policy):
        records.append(EnvelopeEntry(pt, pow_real(pt.s, p), pow_real(abs(pt.y), p)))

    # records have A increasing and B decreasing: classic lower hull of lines
    hull: list[EnvelopeEntry] = []
    for e in records:
        while len(hull) >= 2:
            u_new = _crossing_u(hull[-1], e)
            u_old = _crossing_u(hull[-2], hull[-1])
            # equality would mean hull[-1] only touches the envelope at a point
            if cmp(u_new, u_old, policy) is Ordering.GT:
                break
            hull.pop()
        hull.append(e)

    for left, right in zip(hull, hull[1:]):
        w = sqrt(_crossing_u(left, right))
        left.w_hi = w
        right.w_lo = w
    hull[0].w_lo = Real.exact(1)
    return hull


def brute_best_approximations(alpha, p, s_max: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> OracleResult:
    """Every r/s with ``s <= s_max`` that is an L^p best approximation, up to a certified horizon.

    A point with ``s > s_max`` has ``w * F_t^p >= (s_max + 1)^p > s_max^p``, so
    it cannot compete while the envelope value ``A + B*u`` stays below
    ``s_max^p``; the horizon is where the envelope reaches that level.
    """
    if s_max < 2:
        raise ValueError("s_max must be >= 2")
    p = Fraction(p)
    x = as_spec(alpha).real()
    hull = lower_envelope(x, p, s_max, policy)
    cap = pow_real(s_max, p)

    kept: list[EnvelopeEntry] = []
    horizon_w: Real | None = None
    for e in hull:
        # value of the envelope at the start of this owner's piece
        u_start = e.w_lo * e.w_lo
        if not less(e.A + e.B * u_start, cap, policy):
            break
        kept.append(e)
        u_cap = (cap - e.A) / e.B
        if e.w_hi is None or less(u_cap, e.w_hi * e.w_hi, policy):
            horizon_w = sqrt(u_cap)
            break
    if horizon_w is None:
        raise UndecidableComparison("envelope did not reach the certification cap")
    return OracleResult(p, s_max, kept, horizon_w)


def engine_window(exp: PcfExpansion, result: OracleResult,
                  policy: PrecisionPolicy = DEFAULT_POLICY) -> list[Fraction]:
    """Engine convergents whose crossing ``w = t^p`` lies below the oracle horizon."""
    out = []
    for (r, s), w2 in zip(exp.convergents, exp.w2s):
        if not less(sqrt(w2), result.horizon_w, policy):
            break
        out.append(Fraction(r, s))
    return out


@dataclass
class Agreement:
    match: bool
    engine: list[Fraction]
    oracle: list[Fraction]
    reached_horizon: bool  # False: only a prefix of the oracle list was compared


def agreement(exp: PcfExpansion, result: OracleResult, policy: PrecisionPolicy = DEFAULT_POLICY) -> Agreement:
    """Compare engine convergents with oracle best approximations below the horizon.

    When the engine expansion stops before the horizon, its convergents must
    be a prefix of the oracle list.
    """
    engine = engine_window(exp, result, policy)
    oracle = result.fractions()
    reached = len(engine) < len(exp.convergents)
    match = engine == oracle if reached else engine == oracle[:len(engine)]
    return Agreement(match, engine, oracle, reached)


def brute_admissible(alpha, p, t, ref_point: LatticePoint, s_max: int,
                     policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
    """True iff no lattice point other than the origin lies strictly inside ``B_t(ref_point)``.

    Scans ``0 <= s <= s_max``; points with ``s > t * F_t(ref)`` cannot be
    inside because ``F_t(s, y) >= s / t``. ``ref_point`` itself (and its
    mirror image) sit on the boundary and are skipped.
    """
    if s_max < ref_point.s:
        raise ValueError("s_max must be >= ref_point.s")
    p = Fraction(p)
    t = as_real(t)
    x = as_spec(alpha).real()
    radius = stretched_quasinorm(ref_point.s, ref_point.y, p, t)
    # column s = 0: points (0, k) with |k| >= 1 have F_t = t|k|
    if ref_point.s != 0 or abs(ref_point.r) != 1:
        if less(t, radius, policy):
            return False
    reach = radius * t
    s_top = min(s_max, math.floor(reach.at(policy.initial_bits).fractions()[1]))
    y_reach = radius / t
    for s in range(1, s_top + 1):
        iv = x.at(policy.initial_bits + 2 * s.bit_length())
        lo, hi = iv.fractions()
        yr = float(y_reach.at(64).fractions()[1]) + 1
        for r in range(math.floor(s * lo - yr), math.ceil(s * hi + yr) + 1):
            if (s, r) == (ref_point.s, ref_point.r) or (s, r) == (-ref_point.s, -ref_point.r):
                continue
            y = lattice_y(r, s, x)
            if not less(abs(y), y_reach, policy):
                continue
            if cmp(stretched_quasinorm(s, y, p, t), radius, policy) is Ordering.LT:
                return False
    return True
