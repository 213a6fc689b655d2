"""Indefinite binary quadratic forms.

A form ``[a, b, c]`` is ``a x^2 + b x y + c y^2`` with discriminant
``D = b^2 - 4ac > 0`` not a square.  Matrices act on forms by substitution:
``f.act(M)`` is ``f(M (x, y)^T)``, so ``(f.act(M)).act(N) == f.act(M @ N)``.

Reduction follows the classical indefinite convention
``|sqrt(D) - 2|a|| < b < sqrt(D)``.  The right-neighbour map sends reduced
forms to reduced forms and its orbits (cycles) are exactly the proper
equivalence classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd, isqrt

from .arith import PellSolution, is_square, sign

Matrix = tuple[tuple[int, int], tuple[int, int]]

IDENTITY: Matrix = ((1, 0), (0, 1))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def mat_adj(A: Matrix) -> Matrix:
    """Adjugate; equals the inverse for determinant-one matrices."""
    return ((A[1][1], -A[0][1]), (-A[1][0], A[0][0]))


def mat_det(A: Matrix) -> int:
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def mat_neg(A: Matrix) -> Matrix:
    return ((-A[0][0], -A[0][1]), (-A[1][0], -A[1][1]))


def mat_pow(A: Matrix, k: int) -> Matrix:
    if k < 0:
        return mat_pow(mat_adj(A), -k)
    out = IDENTITY
    for _ in range(k):
        out = mat_mul(out, A)
    return out


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    def is_primitive(self) -> bool:
        return self.content == 1

    def primitive_part(self) -> "QuadForm":
        g = self.content
        return QuadForm(self.a // g, self.b // g, self.c // g)

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, M: Matrix) -> "QuadForm":
        """The substituted form (x, y) -> f(M (x, y))."""
        (p, q), (r, s) = M
        a, b, c = self.a, self.b, self.c
        return QuadForm(
            a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s,
        )

    def __neg__(self) -> "QuadForm":
        return QuadForm(-self.a, -self.b, -self.c)

    def scale(self, k: int) -> "QuadForm":
        return QuadForm(k * self.a, k * self.b, k * self.c)

    def __str__(self) -> str:
        return f"{self.a},{self.b},{self.c}"

    @classmethod
    def parse(cls, text: str) -> "QuadForm":
        parts = [int(t) for t in text.replace("[", "").replace("]", "").split(",")]
        if len(parts) != 3:
            raise ValueError(f"cannot parse form {text!r}")
        return cls(*parts)

    def as_list(self) -> list[int]:
        return [self.a, self.b, self.c]


def _check_indefinite(f: QuadForm) -> int:
    D = f.disc
    if D <= 0:
        raise ValueError(f"form {f} has non-positive discriminant {D}")
    if is_square(D):
        raise ValueError(f"form {f} has square discriminant {D}")
    return D


def is_valid_disc(D: int) -> bool:
    return D > 0 and D % 4 in (0, 1) and not is_square(D)


def is_fundamental_disc(D: int) -> bool:
    if not is_valid_disc(D):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    m = D // 4
    return m % 4 in (2, 3) and _squarefree(m)


def _squarefree(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def is_reduced(f: QuadForm) -> bool:
    D = f.disc
    b, a2 = f.b, 2 * abs(f.a)
    if b <= 0 or b * b >= D:
        return False
    if (a2 + b) ** 2 <= D:
        return False
    return a2 - b <= 0 or (a2 - b) ** 2 < D


def _step_matrix(t: int) -> Matrix:
    return ((0, -1), (1, t))


def rho(f: QuadForm) -> tuple[QuadForm, Matrix]:
    """One step of the right-neighbour map, with its transformation matrix."""
    b, c = f.b, f.c
    D = f.disc
    s = isqrt(D)
    ac = abs(c)
    two_c = 2 * ac
    # target b' = -b + 2 c t, congruent to -b mod 2|c|
    if ac * ac > D:  # |c| > sqrt(D): centre b' in (-|c|, |c|]
        lo = -ac + 1
    else:  # sqrt(D) - 2|c| < b' < sqrt(D)
        lo = s - two_c + 1
    # smallest b' >= lo with b' = -b mod 2|c|
    bp = lo + ((-b - lo) % two_c)
    t = (bp + b) // (2 * c)
    M = _step_matrix(t)
    g = f.act(M)
    assert g.b == bp
    return g, M


def reduce_form(f: QuadForm) -> tuple[QuadForm, Matrix]:
    """Return a reduced form g and P in SL2(Z) with g = f.act(P)."""
    _check_indefinite(f)
    P = IDENTITY
    g = f
    steps = 0
    while not is_reduced(g):
        g, M = rho(g)
        P = mat_mul(P, M)
        steps += 1
        if steps > 10_000 + 10 * f.disc.bit_length() * (abs(f.a) + abs(f.c)).bit_length():
            raise RuntimeError(f"reduction of {f} did not terminate")
    return g, P


def _cycle_of_reduced(g: QuadForm) -> tuple[list[QuadForm], list[Matrix]]:
    forms = [g]
    mats: list[Matrix] = []
    h = g
    while True:
        h, M = rho(h)
        mats.append(M)
        if h == g:
            break
        forms.append(h)
    return forms, mats


def reduce_cycle(f: QuadForm) -> list[QuadForm]:
    """The full cycle of reduced forms properly equivalent to ``f``.

    The cycle is rotated to start at its smallest member, so two forms are
    properly equivalent exactly when their cycles compare equal.
    """
    g, _ = reduce_form(f)
    forms, _ = _cycle_of_reduced(g)
    i = forms.index(min(forms))
    return forms[i:] + forms[:i]


@lru_cache(maxsize=200_000)
def canonical_form(f: QuadForm) -> tuple[QuadForm, Matrix]:
    """Smallest reduced form r in the class of f, and P with f.act(P) == r."""
    g, P = reduce_form(f)
    forms, mats = _cycle_of_reduced(g)
    best = min(range(len(forms)), key=lambda i: forms[i])
    for M in mats[:best]:
        P = mat_mul(P, M)
    return forms[best], P


def sl2_equivalent(f: QuadForm, g: QuadForm) -> bool:
    if f.disc != g.disc:
        return False
    return canonical_form(f)[0] == canonical_form(g)[0]


@lru_cache(maxsize=100_000)
def primitive_automorph(f: QuadForm) -> Matrix:
    """Generator of the proper automorphs of f modulo -1.

    It is the matrix ``[[(t-bu)/2, -cu], [au, (t+bu)/2]]`` for the least
    solution of ``t^2 - D u^2 = 4`` with t, u > 0 (for the primitive part),
    read off from one turn around the reduced cycle.
    """
    _check_indefinite(f)
    p = f.primitive_part()
    g, P = reduce_form(p)
    _, mats = _cycle_of_reduced(g)
    A = IDENTITY
    for M in mats:
        A = mat_mul(A, M)
    # g.act(A) == g, so p.act(P A P^-1) == p
    A = mat_mul(mat_mul(P, A), mat_adj(P))
    if A[0][0] + A[1][1] < 0:
        A = mat_neg(A)
    # orient so that u > 0 (attracting fixed point is the second root)
    u_num = A[1][0]
    if sign(u_num) != sign(p.a):
        A = mat_adj(A)
    assert p.act(A) == p
    return A


def automorph(f: QuadForm, pell: PellSolution) -> Matrix:
    """The automorph ``[[u - b v, -2 c v], [2 a v, u + b v]]`` built from a Pell solution."""
    if f.disc != pell.disc:
        raise ValueError(f"discriminant mismatch: form {f.disc}, Pell {pell.disc}")
    if not f.is_primitive():
        raise ValueError("automorph needs a primitive form")
    u, v = pell.u, pell.v
    return ((u - f.b * v, -2 * f.c * v), (2 * f.a * v, u + f.b * v))


def optimal_embedding_matrix(f: QuadForm) -> Matrix:
    """Image of sqrt(D) under the embedding attached to f: ``[[-b, -2c], [2a, b]]``."""
    return ((-f.b, -2 * f.c), (2 * f.a, f.b))


# ---------------------------------------------------------------------------
# Gamma_0(N)-equivalence


def in_gamma0(M: Matrix, N: int) -> bool:
    return mat_det(M) == 1 and M[1][0] % N == 0


def _p1_normalize(x: int, y: int, N: int) -> tuple[int, int]:
    x %= N
    y %= N
    best = None
    for u in range(1, N + 1):
        if gcd(u, N) != 1:
            continue
        cand = (u * x % N, u * y % N)
        if best is None or cand < best:
            best = cand
    return best if best is not None else (0, 0)


@lru_cache(maxsize=200_000)
def gamma0_automorph(f: QuadForm, N: int) -> Matrix:
    """Least positive power of the primitive automorph lying in Gamma_0(N)."""
    A = primitive_automorph(f)
    B = A
    for _ in range(12 * N * N + 12):
        if B[1][0] % N == 0:
            return B
        B = mat_mul(B, A)
    raise RuntimeError("no automorph power in Gamma_0(N)")


@lru_cache(maxsize=200_000)
def gamma0_class_key(f: QuadForm, N: int) -> tuple:
    """An invariant that agrees exactly on Gamma_0(N)-equivalent forms.

    With ``r = f.act(P)`` the canonical reduced form of f, the class of f
    under Gamma_0(N) is the orbit of the right coset ``P^-1 Gamma_0(N)``
    under the automorphs of r.  Cosets are points of P^1(Z/N) given by the
    first column of ``P^-1``.
    """
    r, P = canonical_form(f)
    if N == 1:
        return (r,)
    Q = mat_adj(P)
    A = primitive_automorph(r)
    x, y = Q[0][0], Q[1][0]
    seen = []
    pt = _p1_normalize(x, y, N)
    while pt not in seen:
        seen.append(pt)
        x, y = A[0][0] * x + A[0][1] * y, A[1][0] * x + A[1][1] * y
        pt = _p1_normalize(x, y, N)
    return (r, min(seen))


@lru_cache(maxsize=100_000)
def gamma0_wide_form(f: QuadForm, N: int) -> tuple[QuadForm, Matrix]:
    """A Gamma_0(N)-equivalent form with small ``|a|``, i.e. a wide axis.

    Returns ``(g, gamma)`` with ``g = f.act(gamma)`` and gamma in Gamma_0(N).
    Candidates are ``h.act(sigma)`` for h in the reduced cycle of f and
    sigma a small matrix moving the transformation back into Gamma_0(N);
    the leading coefficient of such a candidate is ``h(x, y)`` for the
    first column (x, y) of sigma.
    """
    best = (abs(f.a), f, IDENTITY)
    g, Q = reduce_form(f)
    forms, mats = _cycle_of_reduced(g)
    box = max(N, 1)
    start = Q[1]
    # go round the cycle until the bottom row of Q returns to its starting
    # point of P^1(Z/N), so the candidate set depends only on the class of f
    for _ in range(12 * box + 1):
        for i, h in enumerate(forms):
            for x in range(-box, box + 1):
                for y in range(0, box + 1):
                    if gcd(x, y) != 1 or (Q[1][0] * x + Q[1][1] * y) % N:
                        continue
                    v = abs(h(x, y))
                    if v and v < best[0]:
                        _, s, t = _egcd(x, y)
                        gamma = mat_mul(Q, ((x, -t), (y, s)))
                        best = (v, f.act(gamma), gamma)
            Q = mat_mul(Q, mats[i])
        if (Q[1][0] * start[1] - Q[1][1] * start[0]) % N == 0:
            break
    _, g, gamma = best
    # centre the axis near 0 with a translation, which lies in Gamma_0(N)
    k = _round_div(-g.b, 2 * g.a)
    T = ((1, k), (0, 1))
    return g.act(T), mat_mul(gamma, T)


def _round_div(p: int, q: int) -> int:
    """Nearest integer to p / q."""
    if q < 0:
        p, q = -p, -q
    return (2 * p + q) // (2 * q)


def gamma0_equivalent(f: QuadForm, g: QuadForm, N: int) -> bool:
    return f.disc == g.disc and gamma0_class_key(f, N) == gamma0_class_key(g, N)


def gamma0_witness(f: QuadForm, g: QuadForm, N: int) -> Matrix | None:
    """A matrix gamma in Gamma_0(N) with ``f.act(gamma) == g``, or None."""
    if f.disc != g.disc:
        return None
    r1, P1 = canonical_form(f)
    r2, P2 = canonical_form(g)
    if r1 != r2:
        return None
    A = primitive_automorph(r1)
    # f.act(P1 A^k P2^-1) == g for every k; find one in Gamma_0(N).  The
    # residues of A^k mod N repeat once A^k = +-I mod N, so the search stops there.
    Q2 = mat_adj(P2)
    B = IDENTITY
    for k in range(12 * N * N + 12):
        if k and _is_pm_identity_mod(B, N):
            break
        cand = mat_mul(mat_mul(P1, B), Q2)
        if cand[1][0] % N == 0:
            assert f.act(cand) == g
            return cand
        B = mat_mul(B, A)
    return None


def _is_pm_identity_mod(B: Matrix, N: int) -> bool:
    (a, b), (c, d) = B
    return b % N == 0 and c % N == 0 and (a - d) % N == 0 and (a * a - 1) % N == 0


# ---------------------------------------------------------------------------
# narrow class groups


def reduced_forms(D: int, primitive_only: bool = True) -> list[QuadForm]:
    """All reduced forms of discriminant D."""
    if not is_valid_disc(D):
        raise ValueError(f"{D} is not a valid non-square discriminant")
    s = isqrt(D)
    out = []
    for b in range(1, s + 1):
        if (b - D) % 2 or b * b >= D:
            continue
        m = (D - b * b) // 4  # = -a c
        for a_abs in range(1, m + 1):
            if m % a_abs:
                continue
            for a in (a_abs, -a_abs):
                f = QuadForm(a, b, -m // a)
                if is_reduced(f) and (not primitive_only or f.is_primitive()):
                    out.append(f)
    return sorted(out)


def cycle_count(D: int) -> int:
    """Number of cycles of primitive reduced forms (an independent count of h+)."""
    remaining = set(reduced_forms(D))
    count = 0
    while remaining:
        f = remaining.pop()
        g = f
        while True:
            g, _ = rho(g)
            if g == f:
                break
            remaining.discard(g)
        count += 1
    return count


def _represent_coprime(f: QuadForm, m: int) -> QuadForm:
    """An equivalent form whose first coefficient is coprime to m."""
    for bound in range(1, 50):
        for x, y in product(range(-bound, bound + 1), repeat=2):
            if gcd(x, y) != 1:
                continue
            v = f(x, y)
            if v != 0 and gcd(v, m) == 1:
                # complete (x, y) to a matrix of determinant one
                _, s, t = _egcd(x, y)  # s x + t y = 1
                M = ((x, -t), (y, s))
                g = f.act(M)
                assert g.a == v
                return g
    raise RuntimeError("no coprime representation found")


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), sign(a), 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Dirichlet composition of two primitive forms of the same discriminant."""
    D = f.disc
    if g.disc != D:
        raise ValueError("composition needs equal discriminants")
    g2 = _represent_coprime(g, f.a)
    a1, b1 = f.a, f.b
    a2, b2 = g2.a, g2.b
    m1 = 2 * abs(a1)
    # B = b1 mod 2|a1|, B = b2 mod 2|a2|; compatible since b1 = b2 mod 2
    _, s, _ = _egcd(abs(a1), abs(a2))
    # solve B = b1 + 2|a1| k with 2|a1| k = b2 - b1 mod 2|a2|
    k = ((b2 - b1) // 2) * s % abs(a2)
    B = b1 + m1 * k
    mod = abs(a1 * a2) * 2
    B %= mod
    A = a1 * a2
    assert (B * B - D) % (4 * A) == 0, (f, g2, B)
    return QuadForm(A, B, (B * B - D) // (4 * A))


@dataclass
class NarrowClassGroup:
    disc: int
    classes: list[QuadForm]
    table: list[list[int]]
    identity: int = 0
    _keys: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return len(self.classes)

    def index_of(self, f: QuadForm) -> int:
        return self._keys[canonical_form(f.primitive_part())[0]]

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def inverse(self, i: int) -> int:
        return next(j for j in range(self.order) if self.table[i][j] == self.identity)

    def element_order(self, i: int) -> int:
        k, x = 1, i
        while x != self.identity:
            x = self.table[x][i]
            k += 1
        return k

    def exponent(self) -> int:
        e = 1
        for i in range(self.order):
            o = self.element_order(i)
            e = e * o // gcd(e, o)
        return e


def principal_form(D: int) -> QuadForm:
    b = D % 2
    return QuadForm(1, b, (b - D) // 4)


def narrow_class_group(D: int) -> NarrowClassGroup:
    """Narrow class group of a fundamental discriminant, via cycles and Dirichlet composition."""
    if not is_valid_disc(D):
        raise ValueError(f"{D} is not a valid discriminant (need D > 0, D = 0,1 mod 4, non-square)")
    if not is_fundamental_disc(D):
        raise ValueError(f"class-group composition is restricted to fundamental discriminants; {D} is not")
    reps = sorted({canonical_form(f)[0] for f in reduced_forms(D)})
    principal = canonical_form(principal_form(D))[0]
    reps.remove(principal)
    reps = [principal] + reps
    keys = {r: i for i, r in enumerate(reps)}
    table = [[keys[canonical_form(compose(f, g))[0]] for g in reps] for f in reps]
    return NarrowClassGroup(D, reps, table, 0, keys)


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True)
class ClassCharacter:
    """A character with values exp(2 pi i e_k / order) on class k."""

    order: int
    exponents: tuple[int, ...]

    def value_exponent(self, k: int) -> int:
        return self.exponents[k] % self.order

    def is_trivial(self) -> bool:
        return all(e % self.order == 0 for e in self.exponents)

    def is_real(self) -> bool:
        return all((2 * e) % self.order == 0 for e in self.exponents)

    def real_value(self, k: int) -> int:
        """The value on class k as +-1 (real characters only)."""
        e = self.value_exponent(k)
        if e == 0:
            return 1
        if 2 * e == self.order:
            return -1
        raise ValueError("character value is not real")

    def value(self, k: int) -> complex:
        import cmath

        return cmath.exp(2j * cmath.pi * self.value_exponent(k) / self.order)

    def as_json(self) -> list:
        return [self.order, [self.value_exponent(k) for k in range(len(self.exponents))]]


def characters(G: NarrowClassGroup) -> list[ClassCharacter]:
    """All characters of G, found by assigning roots of unity to generators."""
    e = G.exponent()
    gens: list[int] = []
    span = {G.identity}
    for i in sorted(range(G.order), key=lambda i: -G.element_order(i)):
        if i in span:
            continue
        gens.append(i)
        new = set(span)
        frontier = list(span)
        while frontier:
            x = frontier.pop()
            for gidx in gens:
                y = G.mul(x, gidx)
                if y not in new:
                    new.add(y)
                    frontier.append(y)
        span = new
    chars = []
    for assignment in product(range(e), repeat=len(gens)):
        values = {G.identity: 0}
        frontier = [G.identity]
        ok = True
        while frontier and ok:
            x = frontier.pop()
            for gidx, val in zip(gens, assignment):
                y = G.mul(x, gidx)
                v = (values[x] + val) % e
                if y in values:
                    if values[y] != v:
                        ok = False
                        break
                else:
                    values[y] = v
                    frontier.append(y)
        if ok and len(values) == G.order:
            # full multiplicativity check
            if all(values[G.mul(i, j)] == (values[i] + values[j]) % e for i in range(G.order) for j in range(G.order)):
                chars.append(ClassCharacter(e, tuple(values[k] for k in range(G.order))))
    chars = sorted(set(chars), key=lambda c: c.exponents)
    return chars


def reversal_class(G: NarrowClassGroup) -> int:
    """Index of the class of the negated principal form (orientation reversal)."""
    return G.index_of(-principal_form(G.disc))


def is_odd(chi: ClassCharacter, G: NarrowClassGroup) -> bool:
    e = chi.value_exponent(reversal_class(G))
    return 2 * e == chi.order


def class_group_json(G: NarrowClassGroup) -> str:
    return json.dumps(
        {
            "disc": G.disc,
            "h_plus": G.order,
            "classes": [f.as_list() for f in G.classes],
            "characters": [c.as_json() for c in characters(G)],
        },
        sort_keys=False,
    )


# ---------------------------------------------------------------------------
# Heegner forms and lattices


@dataclass(frozen=True)
class HeegnerData:
    p: int
    r: int
    form: QuadForm


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def heegner_root(D: int, p: int) -> int:
    """Least r >= 0 with r^2 = D mod 4p, for a prime p split in Q(sqrt(D))."""
    if p == 2:
        split = D % 8 == 1
    else:
        split = _legendre(D, p) == 1
    if not split:
        raise ValueError(f"p not split: {p} does not split in the field of discriminant {D}")
    for r in range(2 * p):
        if (r * r - D) % (4 * p) == 0:
            return r
    raise ValueError(f"p not split: no r with r^2 = {D} mod {4 * p}")


def heegner_form(D: int, p: int, klass: int | None = None, r: int | None = None) -> HeegnerData:
    """A Heegner form at p: ``p | a`` and ``b = r mod 2p``.

    Without a class index the principal form ``[(r^2 - D)/4, r, 1]`` is
    returned.  Otherwise the given narrow class is searched.
    """
    if r is None:
        r = heegner_root(D, p)
    elif (r * r - D) % (4 * p):
        raise ValueError(f"r={r} does not satisfy r^2 = D mod 4p")
    if klass is None or klass == 0:
        N = (r * r - D) // 4
        f = QuadForm(N, r, 1)
        if klass is None:
            return HeegnerData(p, r, f)
    G = narrow_class_group(D)
    return heegner_in_class(G.classes[klass], p, r)


def heegner_in_class(target: QuadForm, p: int, r: int | None = None) -> HeegnerData:
    """A Heegner form at p that is SL_2(Z)-equivalent to ``target``."""
    D = target.disc
    if r is None:
        r = heegner_root(D, p)
    for bound in range(1, 60):
        for x, y in product(range(-bound, bound + 1), repeat=2):
            if gcd(x, y) != 1 or target(x, y) % p:
                continue
            _, s, t = _egcd(x, y)
            g = target.act(((x, -t), (y, s)))
            # translate b into the residue r mod 2p using (x, y) -> (x + k y, y)
            for k in range(p):
                h = g.act(((1, k), (0, 1)))
                if (h.b - r) % (2 * p) == 0:
                    assert h.a % p == 0 and h.disc == D
                    return HeegnerData(p, r, h)
    raise ValueError(f"no Heegner form at {p} equivalent to {target}")


def class_representatives(D: int) -> list[QuadForm]:
    """One canonical reduced form per SL_2(Z) class of primitive forms of discriminant D."""
    return sorted({canonical_form(f)[0] for f in reduced_forms(D)})


@dataclass(frozen=True)
class EvenLattice:
    gram: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.gram)


def smith_diagonal(M: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix."""
    A = [list(row) for row in M]
    n, m = len(A), len(A[0]) if A else 0
    diag = []
    for t in range(min(n, m)):
        # find pivot with smallest nonzero absolute value
        while True:
            piv = None
            for i in range(t, n):
                for j in range(t, m):
                    if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return diag + [0] * (min(n, m) - t)
            i, j = piv
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
            p = A[t][t]
            done = True
            for i in range(t + 1, n):
                q = A[i][t] // p
                for j in range(t, m):
                    A[i][j] -= q * A[t][j]
                if A[i][t]:
                    done = False
            for j in range(t + 1, m):
                q = A[t][j] // p
                for i in range(t, n):
                    A[i][j] -= q * A[i][t]
                if A[t][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, m) if A[i][j] % p), None)
            if bad is None:
                break
            for j in range(t, m):
                A[t][j] += A[bad[0]][j]
        diag.append(abs(A[t][t]))
    return diag


def lattice_level(L: EvenLattice | list[list[int]]) -> int:
    """Index of an even lattice in its dual, from the Smith form of the Gram matrix."""
    gram = L.gram if isinstance(L, EvenLattice) else L
    gram = [list(r) for r in gram]
    n = len(gram)
    for i in range(n):
        if len(gram[i]) != n or any(gram[i][j] != gram[j][i] for j in range(n)):
            raise ValueError("Gram matrix must be square and symmetric")
        if gram[i][i] % 2:
            raise ValueError("Gram matrix must have even diagonal")
    d = smith_diagonal(gram)
    if 0 in d:
        raise ValueError("degenerate Gram matrix")
    out = 1
    for x in d:
        out *= x
    return out
