"""Oriented closed geodesics on Y_0(N) and their signed intersection numbers.

The geodesic of a form ``[a, b, c]`` is the semicircle joining its roots,
oriented from ``(-b - sqrt(D)) / (2a)`` to ``(-b + sqrt(D)) / (2a)``.  The
form transported by ``f.act(M)`` has axis ``M^-1`` applied to the axis of
``f``, with orientation carried along.

Everything here is exact.  Points on an axis are stored as a rational real
part together with the rational square of the imaginary part.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import isqrt

from .arith import sign, sign_sqrt_combo
from .quadforms import (
    IDENTITY,
    Matrix,
    QuadForm,
    _check_indefinite,
    gamma0_automorph,
    gamma0_class_key,
    gamma0_wide_form,
    gamma0_witness,
    mat_adj,
    mat_mul,
)


class DegenerateAxes(ValueError):
    """Raised when two forms share the same axis."""


@dataclass(frozen=True)
class AxisPoint:
    """The point ``x + i*sqrt(y2)`` of the upper half-plane."""

    x: Fraction
    y2: Fraction

    def as_json(self) -> dict:
        return {"x": str(self.x), "y2": str(self.y2)}


def center(f: QuadForm) -> Fraction:
    return Fraction(-f.b, 2 * f.a)


def radius2(f: QuadForm) -> Fraction:
    return Fraction(f.disc, 4 * f.a * f.a)


def orientation(f: QuadForm) -> int:
    """+1 when the geodesic runs left to right, -1 otherwise."""
    return sign(f.a)


def top_point(f: QuadForm) -> AxisPoint:
    return AxisPoint(center(f), radius2(f))


def mobius(M: Matrix, z: AxisPoint) -> AxisPoint:
    """Exact image of a point under a real Mobius map of positive determinant."""
    (a, b), (c, d) = M
    x, y2 = z.x, z.y2
    den = (c * x + d) ** 2 + c * c * y2
    re = ((a * x + b) * (c * x + d) + a * c * y2) / den
    det = a * d - b * c
    return AxisPoint(re, det * det * y2 / (den * den))


def same_axis(f: QuadForm, g: QuadForm) -> bool:
    return f.a * g.b == g.a * f.b and f.a * g.c == g.a * f.c and f.b * g.c == g.b * f.c


def pairing_B(f: QuadForm, g: QuadForm) -> int:
    return f.b * g.b - 2 * f.a * g.c - 2 * g.a * f.c


def linked(f: QuadForm, g: QuadForm) -> bool:
    """True when the root pairs of f and g interlace on the boundary.

    Only positive discriminants are needed here; square discriminants
    (axes with rational endpoints) are accepted.
    """
    if f.disc <= 0 or g.disc <= 0:
        raise ValueError(f"forms {f} and {g} need positive discriminants")
    if same_axis(f, g):
        raise DegenerateAxes(f"forms {f} and {g} have the same axis")
    B = pairing_B(f, g)
    return B * B < f.disc * g.disc


def crossing_point(f: QuadForm, g: QuadForm) -> AxisPoint:
    """The intersection of two linked axes."""
    cf, cg = center(f), center(g)
    rf, rg = radius2(f), radius2(g)
    x = (rf - rg + cg * cg - cf * cf) / (2 * (cg - cf))
    y2 = rf - (x - cf) ** 2
    if y2 <= 0:
        raise ValueError(f"axes of {f} and {g} do not cross")
    return AxisPoint(x, y2)


def crossing_sign(f: QuadForm, g: QuadForm) -> int:
    """Sign of det(tangent of f, tangent of g) at the crossing point.

    The oriented tangent of f at a point z of its axis is
    ``orientation(f) * (y, -(x - center(f)))``.  The determinant equals
    ``s_f s_g (center(g) - center(f)) * y`` with ``y = sqrt(y2) > 0``.
    """
    if not linked(f, g):
        raise ValueError(f"forms {f} and {g} are not linked")
    z = crossing_point(f, g)
    sf, sg = orientation(f), orientation(g)
    tf = (sf * 1, -sf * (z.x - center(f)))  # coefficients of (y, 1)
    tg = (sg * 1, -sg * (z.x - center(g)))
    # det = tf_x tg_y - tf_y tg_x, with x-components carrying a factor y
    # = y * (tf[0] * tg[1] - tf[1] * tg[0])
    coeff = tf[0] * tg[1] - tf[1] * tg[0]
    return sign_sqrt_combo(0, coeff, z.y2)


def crossing_sign_fast(f: QuadForm, g: QuadForm) -> int:
    """Closed form of :func:`crossing_sign` for linked forms."""
    return sign(f.b * g.a - g.b * f.a)


@dataclass(frozen=True)
class GeodesicCycle:
    form: QuadForm
    level: int = 1

    def __post_init__(self):
        _check_indefinite(self.form)
        if self.form.a % self.level and self.level > 1:
            # forms not of Heegner shape still define cycles; their automorph
            # power in Gamma_0(N) is found by gamma0_automorph
            pass

    @property
    def automorph(self) -> Matrix:
        return gamma0_automorph(self.form.primitive_part(), self.level)

    def endpoints(self) -> tuple[tuple[Fraction, Fraction, int], tuple[Fraction, Fraction, int]]:
        """Source and target as (p, q, D) meaning p + q sqrt(D)."""
        f = self.form
        return (
            (Fraction(-f.b, 2 * f.a), Fraction(-1, 2 * f.a), f.disc),
            (Fraction(-f.b, 2 * f.a), Fraction(1, 2 * f.a), f.disc),
        )

    def reversed(self) -> "GeodesicCycle":
        return GeodesicCycle(-self.form, self.level)

    def translate(self, M: Matrix) -> "GeodesicCycle":
        return GeodesicCycle(self.form.act(M), self.level)


@dataclass
class WeightedCycle:
    """A finite formal sum of geodesic cycles with exact coefficients."""

    terms: list[tuple[object, GeodesicCycle]] = field(default_factory=list)

    def scaled(self, k) -> "WeightedCycle":
        return WeightedCycle([(k * c, g) for c, g in self.terms if k * c != 0])

    def __add__(self, other: "WeightedCycle") -> "WeightedCycle":
        return WeightedCycle(self.terms + other.terms)

    @property
    def level(self) -> int | None:
        return self.terms[0][1].level if self.terms else None


@dataclass
class CrossingReport:
    plus: int = 0
    minus: int = 0
    witnesses: list[tuple[QuadForm, AxisPoint, int]] = field(default_factory=list)

    @property
    def net(self) -> int:
        return self.plus - self.minus

    def add(self, g: QuadForm, z: AxisPoint, s: int) -> None:
        if s > 0:
            self.plus += 1
        else:
            self.minus += 1
        self.witnesses.append((g, z, s))

    def as_dict(self) -> dict:
        return {
            "plus": self.plus,
            "minus": self.minus,
            "net": self.net,
            "witnesses": [
                {"form": str(g), "point": z.as_json(), "sign": s} for g, z, s in self.witnesses
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


# ---------------------------------------------------------------------------
# fundamental arcs


@dataclass(frozen=True)
class FundamentalArc:
    """The half-open arc [start, end) of an axis, one period of its automorph."""

    form: QuadForm
    start: AxisPoint
    end: AxisPoint

    @property
    def direction(self) -> int:
        return sign(self.end.x - self.start.x)

    def contains(self, z: AxisPoint) -> bool:
        d = self.direction
        return sign(z.x - self.start.x) * d >= 0 and sign(self.end.x - z.x) * d > 0

    def x_range(self) -> tuple[Fraction, Fraction]:
        return min(self.start.x, self.end.x), max(self.start.x, self.end.x)

    def min_y2(self) -> Fraction:
        return min(self.start.y2, self.end.y2)


def point_at_abscissa(f: QuadForm, x: Fraction) -> AxisPoint:
    c = center(f)
    y2 = radius2(f) - (x - c) ** 2
    if y2 <= 0:
        raise ValueError(f"abscissa {x} is not under the axis of {f}")
    return AxisPoint(Fraction(x), y2)


def fundamental_arc(c: GeodesicCycle) -> FundamentalArc:
    """One period of the automorph, placed roughly symmetrically about the top.

    The start is a rational point of the axis near hyperbolic distance half a
    period before the top point, so both ends sit as high as possible.  Any
    start gives a valid half-open period.
    """
    f = c.form
    A = c.automorph
    tr = abs(A[0][0] + A[1][1])
    # translation length l satisfies 2 cosh(l/2) = |trace|; tanh(l/2) = sqrt(tr^2-4)/tr
    th = (tr * tr - 4) ** 0.5 / tr
    R = float(radius2(f)) ** 0.5
    cx = center(f)
    x_float = float(cx) - orientation(f) * R * th
    R2 = radius2(f)
    xs = Fraction(x_float).limit_denominator(10 ** 6 * (1 + f.a * f.a))
    if (xs - cx) ** 2 >= R2:
        xs = cx
    z0 = point_at_abscissa(f, xs)
    z1 = mobius(A, z0)
    return FundamentalArc(f, z0, z1)


# ---------------------------------------------------------------------------
# primary enumerator


def _ceil_sqrt_frac(q: Fraction) -> int:
    """An integer >= sqrt(q) for q >= 0."""
    n = -(-q.numerator // q.denominator)
    r = isqrt(n)
    return r if r * r >= n else r + 1


def _arc_windows(arc: FundamentalArc, rad2: Fraction) -> list[tuple[float, float]]:
    """x-intervals of the arc (with slack) where its height is at most sqrt(rad2)."""
    xlo, xhi = (float(t) for t in arc.x_range())
    c = float(center(arc.form))
    R2 = float(radius2(arc.form))
    r2 = float(rad2)
    eps = 1e-9 * (1 + abs(c) + R2)
    if r2 >= R2:
        return [(xlo - eps, xhi + eps)]
    w = max((R2 - r2) ** 0.5 - eps, 0.0)
    out = []
    if xlo <= c - w:
        out.append((xlo - eps, min(xhi, c - w) + eps))
    if xhi >= c + w:
        out.append((max(xlo, c + w) - eps, xhi + eps))
    return out


def forms_through_arc(arc: FundamentalArc, disc: int) -> list[QuadForm]:
    """All forms of discriminant ``disc`` (any content) crossing the arc, exactly.

    A form meeting the arc at height y has radius at least y, which bounds
    ``|a|`` and restricts the crossing to the part of the arc lying below
    that radius; meeting it at abscissa x bounds ``|b + 2 a x|`` by
    sqrt(disc).  All floating point only widens ranges; every candidate is
    then checked exactly.
    """
    f = arc.form
    ymin2 = arc.min_y2()
    amax = _ceil_sqrt_frac(Fraction(disc) / (4 * ymin2))
    sq = disc ** 0.5 + 1
    out = []
    seen = set()
    for a in range(-amax, amax + 1):
        if a == 0 or 4 * a * a * ymin2 > disc:
            continue
        four_a = 4 * a
        for lo_x, hi_x in _arc_windows(arc, Fraction(disc, 4 * a * a)):
            lo = min(-2 * a * lo_x, -2 * a * hi_x) - sq
            hi = max(-2 * a * lo_x, -2 * a * hi_x) + sq
            b_lo = int(lo) - 2
            b_hi = int(hi) + 2
            start = b_lo + ((disc - b_lo) % 2)
            for b in range(start, b_hi + 1, 2):
                num = b * b - disc
                if num % four_a or (a, b) in seen:
                    continue
                g = QuadForm(a, b, num // four_a)
                if same_axis(f, g):
                    continue
                B = pairing_B(f, g)
                if B * B >= f.disc * disc:
                    continue
                z = crossing_point(f, g)
                if arc.contains(z):
                    seen.add((a, b))
                    out.append(g)
    return out


@lru_cache(maxsize=4096)
def _keyed_candidates(c1: GeodesicCycle, disc: int) -> tuple[tuple[QuadForm, tuple], ...]:
    arc = fundamental_arc(c1)
    return tuple((g, gamma0_class_key(g, c1.level)) for g in forms_through_arc(arc, disc))


def intersection_number(c1: GeodesicCycle, c2: GeodesicCycle) -> CrossingReport:
    """Signed count of transverse crossings of two closed geodesics on Y_0(N).

    Lifts of c2 crossing one fundamental arc of c1 are enumerated from
    explicit coefficient bounds; axes equal to the axis of c1 are excluded.
    The arc is taken on a Gamma_0(N)-equivalent form of c1 with a wide
    axis, so witnesses refer to that form.
    """
    if c1.level != c2.level:
        raise ValueError("cycles live at different levels")
    target = gamma0_class_key(c2.form, c2.level)
    # the count depends only on the Gamma_0(N) class of c1, so enumerate
    # along the widest equivalent axis
    wide = GeodesicCycle(gamma0_wide_form(c1.form, c1.level)[0], c1.level)
    rep = CrossingReport()
    for g, key in _keyed_candidates(wide, c2.form.disc):
        if key != target:
            continue
        z = crossing_point(wide.form, g)
        rep.add(g, z, crossing_sign_fast(wide.form, g))
    rep.witnesses.sort(key=lambda w: (w[1].x, w[0]))
    return rep


def pair_weighted(w1: WeightedCycle, w2: WeightedCycle):
    """Bilinear extension of the intersection number."""
    total = 0
    for a, c1 in w1.terms:
        for b, c2 in w2.terms:
            total += a * b * intersection_number(c1, c2).net
    return total


# ---------------------------------------------------------------------------
# breadth-first tile-walk oracle

S_MAT: Matrix = ((0, -1), (1, 0))
T_MAT: Matrix = ((1, 1), (0, 1))
TI_MAT: Matrix = ((1, -1), (0, 1))


def _psl_normal(M: Matrix) -> Matrix:
    (a, b), (c, d) = M
    if c < 0 or (c == 0 and d < 0):
        return ((-a, -b), (-c, -d))
    return M


def _neighbour_words(depth: int = 4) -> list[Matrix]:
    words = {IDENTITY}
    frontier = [IDENTITY]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for g in (S_MAT, T_MAT, TI_MAT):
                m = _psl_normal(mat_mul(w, g))
                if m not in words:
                    words.add(m)
                    nxt.append(m)
        frontier = nxt
    words.discard(IDENTITY)
    return sorted(words)


_NEIGHBOURS = _neighbour_words()


def _arc_meets_F(f: QuadForm, p: AxisPoint, q: AxisPoint) -> bool:
    """Does the arc of the axis of f between p and q meet the closed standard domain?"""
    xl, xr = min(p.x, q.x), max(p.x, q.x)
    lo, hi = max(xl, Fraction(-1, 2)), min(xr, Fraction(1, 2))
    if lo > hi:
        return False
    c, R2 = center(f), radius2(f)
    K = 1 - R2 + c * c  # need 2 c x >= K somewhere on [lo, hi]
    return max(2 * c * lo, 2 * c * hi) >= K


def _to_standard_domain(z: AxisPoint) -> Matrix:
    """gamma with gamma^-1 z in the closed standard fundamental domain."""
    g = IDENTITY
    w = z
    for _ in range(10_000):
        n = (w.x + Fraction(1, 2)).__floor__()
        if n:
            g = mat_mul(g, ((1, n), (0, 1)))
            w = AxisPoint(w.x - n, w.y2)
        if w.x * w.x + w.y2 < 1:
            g = mat_mul(g, S_MAT)
            w = mobius(mat_adj(S_MAT), w)
        else:
            return g
    raise RuntimeError("reduction to the standard domain did not terminate")


def tiles_along_arc(arc: FundamentalArc) -> list[Matrix]:
    """All gamma (mod +-1) whose translate of the closed standard domain meets the arc."""
    start = _psl_normal(_to_standard_domain(arc.start))
    f = arc.form

    def meets(g: Matrix) -> bool:
        gi = mat_adj(g)
        return _arc_meets_F(f.act(g), mobius(gi, arc.start), mobius(gi, arc.end))

    seen = {start}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for w in _NEIGHBOURS:
            h = _psl_normal(mat_mul(g, w))
            if h in seen:
                continue
            if meets(h):
                seen.add(h)
                queue.append(h)
    return sorted(seen)


def forms_meeting_standard_domain(disc: int) -> list[QuadForm]:
    """A finite superset of the forms whose axis meets the standard domain."""
    amax = isqrt(disc // 3) + 1
    sq = isqrt(disc) + 1
    out = []
    for a in range(-amax, amax + 1):
        if a == 0:
            continue
        bmax = sq + abs(a)
        for b in range(-bmax, bmax + 1):
            if (b * b - disc) % (4 * a):
                continue
            out.append(QuadForm(a, b, (b * b - disc) // (4 * a)))
    return out


def intersection_number_oracle(c1: GeodesicCycle, c2: GeodesicCycle) -> CrossingReport:
    """Independent count: walk the tiles covering one period of c1 and lift c2 into each.

    Equivalence of each candidate to c2 is certified by an explicit matrix
    of Gamma_0(N) transporting c2 onto it.
    """
    if c1.level != c2.level:
        raise ValueError("cycles live at different levels")
    N = c1.level
    arc = fundamental_arc(c1)
    f = c1.form
    local = forms_meeting_standard_domain(c2.form.disc)
    found: dict[QuadForm, tuple[AxisPoint, int]] = {}
    for g in tiles_along_arc(arc):
        gi = mat_adj(g)
        for h in local:
            cand = h.act(gi)  # axis of cand = g applied to axis of h
            if cand in found or same_axis(f, cand):
                continue
            B = pairing_B(f, cand)
            if B * B >= f.disc * cand.disc:
                continue
            z = crossing_point(f, cand)
            if not arc.contains(z):
                continue
            if gamma0_witness(c2.form, cand, N) is None:
                continue
            found[cand] = (z, crossing_sign(f, cand))
    rep = CrossingReport()
    for g, (z, s) in found.items():
        rep.add(g, z, s)
    rep.witnesses.sort(key=lambda w: (w[1].x, w[0]))
    return rep
