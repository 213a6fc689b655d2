"""Seeded property suites and brute-force oracles shared by ``selftest`` and the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd, isqrt

from .arith import is_square
from .geodesics import DegenerateAxes, GeodesicCycle, intersection_number, intersection_number_oracle, linked
from .hecke import as_weighted, hecke_pair, hecke_translate, hecke_weighted
from .geodesics import pair_weighted
from .quadforms import (
    QuadForm,
    class_representatives,
    gamma0_automorph,
    heegner_in_class,
    heegner_root,
    is_valid_disc,
    mat_mul,
)

# ---------------------------------------------------------------------------
# cycle pools


def class_cycles(D_max: int, N: int, D_min: int = 5) -> list[GeodesicCycle]:
    """Every class geodesic with discriminant in [D_min, D_max] at level N.

    At N = 1 these are the SL_2(Z) classes.  At a prime N they are the
    Heegner forms of every class, for both square roots of D mod 4N, over
    the discriminants in which N splits.
    """
    out = []
    for D in range(D_min, D_max + 1):
        if not is_valid_disc(D):
            continue
        if N == 1:
            out += [GeodesicCycle(f, 1) for f in class_representatives(D)]
            continue
        try:
            r = heegner_root(D, N)
        except ValueError:
            continue
        for rr in sorted({r, (-r) % (2 * N)}):
            for f in class_representatives(D):
                out.append(GeodesicCycle(heegner_in_class(f, N, rr).form, N))
    return out


def _trace(M) -> int:
    return abs(M[0][0] + M[1][1])


def affordable(c: GeodesicCycle, max_trace: int) -> bool:
    """Whether the level automorph is small enough for quick enumeration."""
    return _trace(gamma0_automorph(c.form, c.level)) <= max_trace


def random_gamma0(rng: random.Random, N: int, length: int = 3):
    """A short random word in T^k and the lower-triangular generator of Gamma_0(N)."""
    M = ((1, 0), (0, 1))
    for _ in range(length):
        k = rng.choice([-2, -1, 1, 2])
        g = ((1, k), (0, 1)) if rng.random() < 0.5 else ((1, 0), (k * N, 1))
        M = mat_mul(M, g)
    return M


# ---------------------------------------------------------------------------
# pairing properties


def pairing_properties(rng: random.Random, count: int = 200, D_max: int = 200, max_trace: int = 2000,
                       hecke_pairs: int = 10) -> list[tuple[str, bool, str]]:
    """Antisymmetry, orientation reversal, Gamma_0(N) invariance and Hecke self-adjointness.

    Pairs are drawn at levels 1 and 11 from class geodesics whose level
    automorph has trace at most ``max_trace``; the enumeration cost grows
    with that trace.
    """
    pools = {N: [c for c in class_cycles(D_max, N) if affordable(c, max_trace)] for N in (1, 11)}
    anti = orient = inv = 0
    bad: dict[str, list] = {"antisymmetry": [], "orientation": [], "invariance": []}
    nonzero = 0
    for k in range(count):
        N = 1 if k % 2 else 11
        c1, c2 = rng.choice(pools[N]), rng.choice(pools[N])
        x = intersection_number(c1, c2).net
        nonzero += x != 0
        if intersection_number(c2, c1).net != -x:
            bad["antisymmetry"].append((c1.form, c2.form))
        anti += 1
        if intersection_number(c1, c2.reversed()).net != -x or intersection_number(c1.reversed(), c2).net != -x:
            bad["orientation"].append((c1.form, c2.form))
        orient += 1
        g1, g2 = random_gamma0(rng, N), random_gamma0(rng, N)
        t1, t2 = c1.translate(g1), c2.translate(g2)
        if intersection_number(t1, c2).net != x or intersection_number(c1, t2).net != x:
            bad["invariance"].append((c1.form, c2.form, g1, g2))
        inv += 1
    results = [
        ("antisymmetry", not bad["antisymmetry"], f"{anti} pairs, {nonzero} with nonzero pairing, failures {bad['antisymmetry'][:3]}"),
        ("orientation reversal", not bad["orientation"], f"{orient} pairs, failures {bad['orientation'][:3]}"),
        ("Gamma_0(N) invariance", not bad["invariance"], f"{inv} pairs, failures {bad['invariance'][:3]}"),
    ]
    results.append(hecke_self_adjointness(rng, hecke_pairs))
    return results


def _translate_affordable(c: GeodesicCycle, n: int, max_trace: int) -> bool:
    return all(_trace(gamma0_automorph(t.form.primitive_part(), t.level)) <= max_trace
               for _, t in hecke_translate(c, n).terms)


def hecke_self_adjointness(rng: random.Random, pairs: int = 10,
                           max_translate_trace: int = 20000) -> tuple[str, bool, str]:
    """``<c1, T_n c2> = <T_n c1, c2>`` for n in {2, 3, 5} on small level-11 cycles."""
    pool = [c for c in class_cycles(60, 11) if affordable(c, 200)]
    checked, failures, nonzero = 0, [], 0
    tries = 0
    while checked < pairs and tries < 50 * pairs:
        tries += 1
        c1, c2 = rng.choice(pool), rng.choice(pool)
        ns = [n for n in (2, 3, 5) if gcd(n, 11 * c1.form.disc * c2.form.disc) == 1]
        # T_n placed on the first argument is only affordable when its
        # translates have small level automorphs
        ns = [n for n in ns if all(_translate_affordable(c, n, max_translate_trace) for c in (c1, c2))]
        if not ns:
            continue
        for n in ns:
            lhs = hecke_pair(as_weighted(c1), n, as_weighted(c2))
            rhs = pair_weighted(hecke_translate(c1, n), as_weighted(c2))
            nonzero += lhs != 0
            if lhs != rhs:
                failures.append((c1.form, c2.form, n, lhs, rhs))
        checked += 1
    ok = checked == pairs and not failures
    return ("Hecke self-adjointness", ok, f"{checked} pairs, {nonzero} nonzero values, failures {failures[:3]}")


def hecke_multiplicativity(c1: GeodesicCycle, c2: GeodesicCycle, m: int, n: int) -> tuple[object, object]:
    """``(<c1, T_m T_n c2>, <c1, T_mn c2>)`` for coprime m and n."""
    w2 = as_weighted(c2)
    lhs = pair_weighted(as_weighted(c1), hecke_weighted(hecke_weighted(w2, n), m))
    rhs = pair_weighted(as_weighted(c1), hecke_translate(c2, m * n))
    return lhs, rhs


def oracle_discrepancies(cycles: list[GeodesicCycle]) -> tuple[int, list]:
    """Compare the bound-based enumerator with the tile-walk oracle on all ordered pairs."""
    count, bad = 0, []
    for a in cycles:
        for b in cycles:
            p, q = intersection_number(a, b), intersection_number_oracle(a, b)
            count += 1
            if (p.plus, p.minus) != (q.plus, q.minus):
                bad.append((a.form, b.form, (p.plus, p.minus), (q.plus, q.minus)))
    return count, bad


# ---------------------------------------------------------------------------
# Pell brute force

_SIEVE_MODULI = (64, 9, 5, 7, 11, 13, 17)


def _allowed_residues(D: int) -> tuple[int, list[int]]:
    """Residues v mod M for which 1 + D v^2 is a square modulo every sieve modulus."""
    M, allowed = 1, [0]
    for m in _SIEVE_MODULI:
        squares = {(x * x) % m for x in range(m)}
        ok = [r for r in range(m) if (1 + D * r * r) % m in squares]
        # combine by the Chinese remainder theorem
        inv = pow(M, -1, m)
        allowed = [a + M * (((b - a) * inv) % m) for a in allowed for b in ok]
        M *= m
    return M, sorted(allowed)


def pell_smallest_v(D: int, limit: int) -> int | None:
    """The least v in [1, limit) with 1 + D v^2 a perfect square, by exhaustive search.

    Values of v failing a necessary congruence condition are skipped; every
    other v is tested exactly.
    """
    if limit <= 1:
        return None
    if limit < 2 * 10**6:
        # building the sieve costs more than a direct scan this short
        for v in range(1, limit):
            if is_square(1 + D * v * v):
                return v
        return None
    M, res = _allowed_residues(D)
    base = 0
    while base < limit:
        for r in res:
            v = base + r
            if v == 0:
                continue
            if v >= limit:
                return None
            w = 1 + D * v * v
            s = isqrt(w)
            if s * s == w:
                return v
        base += M
    return None


def _chebyshev_t(k: int, x: int) -> int:
    """u-part of (x + y sqrt D)^k for a norm-one unit: T_k(x)."""
    t0, t1 = 1, x
    for _ in range(k - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1 if k else 1


def _primes_upto(n: int) -> list[int]:
    return [k for k in range(2, n + 1) if all(k % q for q in range(2, isqrt(k) + 1))]


def _iroot(n: int, k: int) -> int:
    """Integer part of the k-th root of n >= 0."""
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


def pell_no_proper_root(D: int, u: int, v: int) -> bool:
    """True when u + v sqrt D is not a k-th power (k >= 2) of a norm-one unit of Z[sqrt D].

    Norm-one units greater than 1 form a cyclic group, so a non-minimal
    solution is a prime power of a smaller one.  A k-th root eta = x + y sqrt D
    satisfies ``T_k(x) = u`` and ``eta^k = u + v sqrt D``, which lies in
    ``(2u - 1, 2u)``; so eta is within 1 of the k-th root of 2u and
    ``x = (eta + 1/eta) / 2`` is one of a few integers around it.  The bound
    ``T_k(2) > 1.8^k`` limits k.
    """
    kmax = 1
    while _chebyshev_t(kmax + 1, 2) <= u:
        kmax += 1
    for k in _primes_upto(kmax):
        r = _iroot(2 * u, k)
        for x in range(max(2, r // 2 - 1), r // 2 + 3):
            if _chebyshev_t(k, x) == u:
                w = x * x - 1
                if w % D == 0 and is_square(w // D):
                    return False
    return True


def pell_minimality(D_max: int = 200, brute_cap: int = 3 * 10**8) -> tuple[list[int], list[int], list]:
    """Check pell_fundamental against exhaustive search (v below ``brute_cap``) or the root certificate.

    Returns (D checked by brute force, D checked by certificate, failures).
    """
    from .arith import pell_fundamental

    brute, cert, bad = [], [], []
    for D in range(2, D_max + 1):
        if is_square(D):
            continue
        P = pell_fundamental(D)
        if P.u * P.u - D * P.v * P.v != 1:
            bad.append((D, P.u, P.v, "not a solution"))
            continue
        if P.v <= brute_cap:
            brute.append(D)
            if pell_smallest_v(D, P.v + 1) != P.v:
                bad.append((D, P.u, P.v, "smaller solution exists"))
        else:
            cert.append(D)
            if not pell_no_proper_root(D, P.u, P.v):
                bad.append((D, P.u, P.v, "is a proper power"))
    return brute, cert, bad


# ---------------------------------------------------------------------------
# certified interlacing


def _root_intervals(f: QuadForm, k: int) -> list[tuple[Fraction, Fraction]]:
    """Enclosures of the two roots of ``f(x, 1)`` using sqrt(D) bracketed to 2^-k."""
    D = f.disc
    s = isqrt(D << (2 * k))
    lo, hi = Fraction(s, 1 << k), Fraction(s + 1, 1 << k)
    out = []
    for sgn in (-1, 1):
        ends = [Fraction(-f.b + sgn * t, 2 * f.a) for t in (lo, hi)]
        out.append((min(ends), max(ends)))
    return out


def interlaced_by_intervals(f: QuadForm, g: QuadForm, max_bits: int = 400) -> bool | None:
    """Root interlacing decided by refining rational enclosures until they separate.

    Returns None only for pairs with a shared root (never separated).
    """
    for k in range(4, max_bits, 4):
        iv = [(x, 0) for x in _root_intervals(f, k)] + [(x, 1) for x in _root_intervals(g, k)]
        iv.sort(key=lambda t: t[0][0])
        if all(iv[i][0][1] < iv[i + 1][0][0] for i in range(3)):
            labels = [t[1] for t in iv]
            # interlaced iff labels alternate
            return labels in ([0, 1, 0, 1], [1, 0, 1, 0])
    return None


def random_form(rng: random.Random, bound: int = 30) -> QuadForm:
    while True:
        a, b, c = (rng.randint(-bound, bound) for _ in range(3))
        if a == 0:
            continue
        D = b * b - 4 * a * c
        if D > 0 and not is_square(D):
            return QuadForm(a, b, c)


def linking_agreement(rng: random.Random, count: int = 1000) -> tuple[int, int, list]:
    """(pairs compared, pairs linked, disagreements) between linked() and the interval test."""
    compared, nlinked, bad = 0, 0, []
    while compared < count:
        f, g = random_form(rng), random_form(rng)
        try:
            fast = linked(f, g)
        except DegenerateAxes:
            continue
        slow = interlaced_by_intervals(f, g)
        compared += 1
        nlinked += fast
        if slow is None or slow != fast:
            bad.append((f, g, fast, slow))
    return compared, nlinked, bad
