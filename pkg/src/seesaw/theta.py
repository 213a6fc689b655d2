"""The arithmetic side: theta coefficients attached to an etale algebra with involution.

The algebra E is a product of factors ``E_i = F_i[theta]/(theta^2 - delta_i)``
where each ``F_i`` is either Q or a real quadratic field ``Q(sqrt d)``.  The
involution negates ``theta`` and fixes ``F = prod F_i``.  An element of a
factor is stored as ``y + z*theta`` with ``y, z`` in ``F_i``, and an element
of ``F_i`` as a tuple of one or two rationals ``x0 (+ x1 sqrt d)``.  The
Q-coordinates of an element of E are the concatenation over factors of
``(y, z)``.

A theta setup fixes a twist ``alpha`` in F, a lattice L in E (optionally
minus a sublattice), a group of totally positive norm-one units acting on L,
and one positive normalizing scalar.  The coefficient at a totally positive
``m`` is the sum over unit orbits of ``v`` in L with ``N(v) = m`` of the
product over split real places of ``sign(v_sigma + v'_sigma)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import isqrt
from typing import Sequence

from .arith import sign, sign_sqrt_combo, squarefree_kernel
from .linalg import in_lattice, integer_kernel, inverse, mat_vec, solve, transpose
from .qseries import QSeries
from .quadforms import (
    ClassCharacter,
    Matrix,
    QuadForm,
    gamma0_automorph,
    heegner_form,
    mat_adj,
    mat_mul,
    narrow_class_group,
)

FElt = tuple  # one or two Fractions


# ---------------------------------------------------------------------------
# arithmetic in a factor


@dataclass(frozen=True)
class Factor:
    """``F[theta]/(theta^2 - delta)`` with ``F = Q(sqrt d)`` (``d = 1`` means Q)."""

    d: int
    delta: FElt

    @property
    def fdim(self) -> int:
        return 1 if self.d == 1 else 2

    @property
    def dim(self) -> int:
        return 2 * self.fdim

    def places(self) -> list[int]:
        return [1] if self.d == 1 else [1, -1]

    def f(self, *xs) -> FElt:
        out = tuple(Fraction(x) for x in xs) + (Fraction(0),) * self.fdim
        return out[: self.fdim]

    def fmul(self, a: FElt, b: FElt) -> FElt:
        if self.fdim == 1:
            return (a[0] * b[0],)
        return (a[0] * b[0] + self.d * a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def fadd(self, a: FElt, b: FElt) -> FElt:
        return tuple(x + y for x, y in zip(a, b))

    def fneg(self, a: FElt) -> FElt:
        return tuple(-x for x in a)

    def fsign(self, a: FElt, s: int) -> int:
        if self.fdim == 1:
            return sign(a[0])
        return sign_sqrt_combo(a[0], s * a[1], self.d)

    def fval(self, a: FElt, s: int) -> float:
        if self.fdim == 1:
            return float(a[0])
        return float(a[0]) + s * float(a[1]) * math.sqrt(self.d)

    def ftrace(self, a: FElt) -> Fraction:
        return a[0] if self.fdim == 1 else 2 * a[0]

    def fsqrt(self, a: FElt) -> list[FElt]:
        """All square roots of a in F (zero, one pair, or none)."""
        if all(x == 0 for x in a):
            return [self.f(0)]
        if self.fdim == 1:
            r = _rat_sqrt(a[0])
            return [] if r is None else [(r,), (-r,)]
        x, y = a
        s = _rat_sqrt(x * x - self.d * y * y)
        if s is None:
            return []
        out = []
        for t in {(x + s) / 2, (x - s) / 2}:
            u = _rat_sqrt(t)
            if u is None or u == 0:
                if u == 0 and y == 0:
                    w = _rat_sqrt(x / self.d) if x / self.d >= 0 else None
                    if w is not None:
                        out += [(Fraction(0), w), (Fraction(0), -w)]
                continue
            cand = (u, y / (2 * u))
            if self.fmul(cand, cand) == tuple(a):
                out += [cand, self.fneg(cand)]
        return sorted(set(out))

    # elements of the factor: (y, z) as flat tuples of length dim
    def split(self, v: Sequence) -> tuple[FElt, FElt]:
        k = self.fdim
        return tuple(v[:k]), tuple(v[k:])

    def join(self, y: FElt, z: FElt) -> tuple:
        return tuple(y) + tuple(z)

    def mul(self, v, w) -> tuple:
        y1, z1 = self.split(v)
        y2, z2 = self.split(w)
        y = self.fadd(self.fmul(y1, y2), self.fmul(self.delta, self.fmul(z1, z2)))
        z = self.fadd(self.fmul(y1, z2), self.fmul(z1, y2))
        return self.join(y, z)

    def conj(self, v) -> tuple:
        y, z = self.split(v)
        return self.join(y, self.fneg(z))

    def norm(self, v) -> FElt:
        y, z = self.split(v)
        return self.fadd(self.fmul(y, y), self.fneg(self.fmul(self.delta, self.fmul(z, z))))

    def place_type(self, s: int) -> int:
        """1 when E splits as R x R at the place, 2 when it is C."""
        return 1 if self.fsign(self.delta, s) > 0 else 2

    def embed(self, v, s: int) -> tuple[float, float]:
        """``(v_sigma, v'_sigma)`` at a split place, or (re, |im|) at a complex one."""
        y, z = self.split(v)
        yv, zv, dv = self.fval(y, s), self.fval(z, s), self.fval(self.delta, s)
        if dv > 0:
            r = math.sqrt(dv)
            return yv + zv * r, yv - zv * r
        return yv, abs(zv) * math.sqrt(-dv)


def _rat_sqrt(q: Fraction) -> Fraction | None:
    q = Fraction(q)
    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def _fstr(a: FElt, d: int) -> str:
    if len(a) == 1 or a[1] == 0:
        return str(a[0])
    sign = "-" if a[1] < 0 else "+"
    return f"{a[0]}{sign}{abs(a[1])}*sqrt({d})"


def _fparse(s: str, fdim: int) -> FElt:
    s = s.replace(" ", "")
    if "*sqrt(" in s:
        head, _, tail = s.rpartition("*sqrt(")
        # split head into x0 and x1 at the last sign that is not leading
        idx = max(head.rfind("+", 1), head.rfind("-", 1))
        if idx > 0 and head[idx - 1] in "+-":
            idx -= 1
        x0, x1 = (head[:idx], head[idx:]) if idx > 0 else ("0", head)
        out = (Fraction(x0), Fraction(x1[1:] if x1.startswith("+") else x1))
    else:
        out = (Fraction(s), Fraction(0))
    return out[:fdim] if fdim == 2 else (out[0],)


# ---------------------------------------------------------------------------
# algebra


@dataclass(frozen=True)
class EtaleAlgebraData:
    """A product of quadratic extensions ``E_i / F_i`` with the involution ``theta -> -theta``."""

    factors: tuple[Factor, ...]
    labels: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    @property
    def fdim(self) -> int:
        return sum(f.fdim for f in self.factors)

    def offsets(self) -> list[int]:
        out, o = [], 0
        for f in self.factors:
            out.append(o)
            o += f.dim
        return out

    def parts(self, v: Sequence) -> list[tuple]:
        return [tuple(v[o : o + f.dim]) for o, f in zip(self.offsets(), self.factors)]

    def fparts(self, m: Sequence) -> list[FElt]:
        out, o = [], 0
        for f in self.factors:
            out.append(tuple(m[o : o + f.fdim]))
            o += f.fdim
        return out

    def mul(self, v, w) -> tuple:
        return sum((f.mul(a, b) for f, a, b in zip(self.factors, self.parts(v), self.parts(w))), ())

    def conj(self, v) -> tuple:
        return sum((f.conj(a) for f, a in zip(self.factors, self.parts(v))), ())

    def norm(self, v) -> tuple:
        """The relative norm ``v * conj(v)`` as an element of F."""
        return sum((f.norm(a) for f, a in zip(self.factors, self.parts(v))), ())

    def relative_trace(self, v) -> tuple:
        return sum((tuple(2 * x for x in f.split(a)[0]) for f, a in zip(self.factors, self.parts(v))), ())

    def one(self) -> tuple:
        return sum((f.join(f.f(1), f.f(0)) for f in self.factors), ())

    def fmul(self, a, b) -> tuple:
        return sum((f.fmul(x, y) for f, x, y in zip(self.factors, self.fparts(a), self.fparts(b))), ())

    def places(self) -> list[tuple[int, int]]:
        return [(i, s) for i, f in enumerate(self.factors) for s in f.places()]

    def fsign(self, a, place) -> int:
        i, s = place
        return self.factors[i].fsign(self.fparts(a)[i], s)

    def fval(self, a, place) -> float:
        i, s = place
        return self.factors[i].fval(self.fparts(a)[i], s)

    def totally_positive(self, a) -> bool:
        return all(self.fsign(a, pl) > 0 for pl in self.places())

    def trace_to_q(self, a) -> Fraction:
        return sum((f.ftrace(x) for f, x in zip(self.factors, self.fparts(a))), Fraction(0))

    def basis(self) -> list[tuple]:
        n = self.dim
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]

    def trace_form(self, alpha, v, w) -> Fraction:
        """``Tr_{F/Q}(alpha (v conj(w) + conj(v) w))``, the twisted bilinear form."""
        t = self.relative_trace(self.mul(v, self.conj(w)))
        return self.trace_to_q(self.fmul(alpha, t))

    def place_partition(self) -> dict[str, list[tuple[int, int]]]:
        s1, s2 = [], []
        for i, s in self.places():
            (s1 if self.factors[i].place_type(s) == 1 else s2).append((i, s))
        return {"S1": s1, "S2": s2, "S3": []}

    def as_json(self) -> dict:
        return {
            "factors": [
                {
                    "F": f.d,
                    "delta": _fstr(f.delta, f.d),
                    "type": "field" if not (f.fdim == 1 and _rat_sqrt(f.delta[0])) else "split",
                    "label": self.labels[i] if i < len(self.labels) else "",
                }
                for i, f in enumerate(self.factors)
            ],
            "involution": "theta -> -theta",
        }


def signature_of(algebra: EtaleAlgebraData, alpha) -> tuple[int, int]:
    """Signature of the twisted trace form from the archimedean places.

    Each place where E is R x R contributes (1, 1); each place where E is C
    contributes (2, 0) or (0, 2) according to the sign of alpha there.
    """
    p = q = 0
    for place in algebra.places():
        i, s = place
        if algebra.factors[i].place_type(s) == 1:
            p, q = p + 1, q + 1
        elif algebra.fsign(alpha, place) > 0:
            p += 2
        else:
            q += 2
    return p, q


def gram_signature(gram: Sequence[Sequence]) -> tuple[int, int]:
    """Exact inertia of a symmetric rational matrix by symmetric elimination."""
    m = [[Fraction(x) for x in r] for r in gram]
    n = len(m)
    pos = neg = 0
    active = list(range(n))
    while active:
        piv = next((i for i in active if m[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and m[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # replace row/col i by i + j to create a nonzero diagonal entry
            for k in range(n):
                m[i][k] += m[j][k]
            for k in range(n):
                m[k][i] += m[k][j]
            continue
        d = m[piv][piv]
        pos, neg = pos + (d > 0), neg + (d < 0)
        active.remove(piv)
        for i in active:
            f = m[i][piv] / d
            if f:
                for k in range(n):
                    m[i][k] -= f * m[piv][k]
        for i in active:
            m[i][piv] = m[piv][i] = Fraction(0)
    return pos, neg


def compute_alpha(gram: Sequence[Sequence], algebra: EtaleAlgebraData) -> tuple:
    """The unique alpha in F with ``gram[i][j] = Tr_{F/Q}(alpha (e_i conj e_j + conj e_i e_j))``.

    ``gram`` is the bilinear form on the images ``e_i v0`` of the Q-basis of E
    under a module generator v0.  Raises ``ValueError`` when the system is
    singular or inconsistent, which happens when v0 is not a generator.
    """
    basis = algebra.basis()
    n = algebra.fdim
    unit = [tuple(Fraction(int(k == j)) for j in range(n)) for k in range(n)]
    rows, rhs = [], []
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            rows.append([algebra.trace_form(u, ei, ej) for u in unit])
            rhs.append(Fraction(gram[i][j]))
    from .linalg import bareiss_rank

    if bareiss_rank(rows) < n:
        raise ValueError("singular system: the chosen vector does not generate the module")
    sol = solve(rows, rhs)
    if sol is None:
        raise ValueError("inconsistent system: the Gram matrix is not a twisted trace form")
    alpha = tuple(sol)
    if all(x == 0 for x in alpha):
        raise ValueError("singular system: the chosen vector does not generate the module")
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            if algebra.trace_form(alpha, ei, ej) != gram[i][j]:
                raise ValueError("reconstruction failed")
    return alpha


# ---------------------------------------------------------------------------
# setups


@dataclass
class ThetaSetup:
    algebra: EtaleAlgebraData
    alpha: tuple
    lattice: list[tuple]
    units: list[tuple]
    exclude: list[tuple] | None = None
    character: object = "trivial"
    kappa: Fraction = Fraction(1)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kappa = Fraction(self.kappa)
        if self.kappa <= 0:
            raise ValueError("kappa must be a positive rational")

    def gram(self) -> list[list[Fraction]]:
        return [[self.algebra.trace_form(self.alpha, v, w) for w in self.lattice] for v in self.lattice]

    def check(self) -> None:
        """Check that the Gram matrix is even integral and that the units preserve it."""
        G = self.gram()
        for i, row in enumerate(G):
            for j, x in enumerate(row):
                if x.denominator != 1 or (i == j and x % 2):
                    raise ValueError("lattice is not even integral for the twisted trace form")
        alg = self.algebra
        for u in self.units:
            if alg.norm(u) != _f_one(alg):
                raise ValueError(f"unit {u} does not have norm one")
            if not alg.totally_positive(_f_part_y(alg, u)):
                raise ValueError(f"unit {u} is not totally positive")
            for b in self.lattice:
                if not in_lattice(self.lattice, alg.mul(u, b)):
                    raise ValueError("units do not preserve the lattice")
            for b in self.exclude or []:
                if not in_lattice(self.exclude, alg.mul(u, b)):
                    raise ValueError("units do not preserve the excluded sublattice")
        if gram_signature(G) != signature_of(alg, self.alpha):
            raise ValueError("signature mismatch between Gram matrix and places")

    def as_json(self) -> dict:
        alg = self.algebra
        return {
            **alg.as_json(),
            "alpha": [_fstr(a, f.d) for a, f in zip(alg.fparts(self.alpha), alg.factors)],
            "lattice": [[str(x) for x in v] for v in self.lattice],
            "exclude": None if self.exclude is None else [[str(x) for x in v] for v in self.exclude],
            "units": [[str(x) for x in v] for v in self.units],
            "character": self.character if isinstance(self.character, str) else _char_json(self.character),
            "kappa": f"{self.kappa.numerator}/{self.kappa.denominator}",
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_json(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str | dict) -> "ThetaSetup":
        data = json.loads(text) if isinstance(text, str) else text
        factors = []
        for f in data["factors"]:
            d = int(f["F"])
            fd = 1 if d == 1 else 2
            factors.append(Factor(d, _fparse(f["delta"], fd)))
        alg = EtaleAlgebraData(tuple(factors), tuple(f.get("label", "") for f in data["factors"]))
        alpha = sum((_fparse(a, f.fdim) for a, f in zip(data["alpha"], factors)), ())
        vecs = lambda rows: [tuple(Fraction(x) for x in r) for r in rows]  # noqa: E731
        char = data.get("character", "trivial")
        if char != "trivial":
            raise ValueError("only the trivial character can be read from a setup file")
        return cls(
            alg,
            alpha,
            vecs(data["lattice"]),
            vecs(data["units"]),
            None if data.get("exclude") is None else vecs(data["exclude"]),
            "trivial",
            Fraction(data.get("kappa", "1")),
            data.get("meta", {}),
        )


def _char_json(chi) -> object:
    if isinstance(chi, (list, tuple)):
        return [c if isinstance(c, str) else c.as_json() for c in chi]
    return chi.as_json()


def _f_one(alg: EtaleAlgebraData) -> tuple:
    return sum((f.f(1) for f in alg.factors), ())


def _f_part_y(alg: EtaleAlgebraData, v) -> tuple:
    return sum((f.split(a)[0] for f, a in zip(alg.factors, alg.parts(v))), ())


# ---------------------------------------------------------------------------
# norm equations


@dataclass(frozen=True)
class HilbertCoefficient:
    m: tuple
    value: Fraction


def _unit_logs(setup: ThetaSetup) -> list[list[float]]:
    alg = setup.algebra
    out = []
    for u in setup.units:
        row = []
        for i, s in alg.places():
            a, _ = alg.factors[i].embed(alg.parts(u)[i], s)
            row.append(math.log(abs(a)))
        out.append(row)
    return out


def _check_unit_rank(setup: ThetaSetup) -> None:
    P = len(setup.algebra.places())
    logs = _unit_logs(setup)
    if len(logs) != P:
        raise ValueError(f"need {P} independent units, got {len(logs)}")
    if P and abs(_det_float(logs)) < 1e-9:
        raise ValueError("units are dependent")


def _det_float(m: list[list[float]]) -> float:
    n = len(m)
    a = [row[:] for row in m]
    det = 1.0
    for c in range(n):
        p = max(range(c, n), key=lambda i: abs(a[i][c]))
        if abs(a[p][c]) < 1e-300:
            return 0.0
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            for k in range(c, n):
                a[i][k] -= f * a[c][k]
    return det


def _solve_float(m: list[list[float]], b: list[float]) -> list[float]:
    n = len(m)
    a = [row[:] + [bi] for row, bi in zip(m, b)]
    for c in range(n):
        p = max(range(c, n), key=lambda i: abs(a[i][c]))
        a[c], a[p] = a[p], a[c]
        for i in range(n):
            if i != c:
                f = a[i][c] / a[c][c]
                for k in range(c, n + 1):
                    a[i][k] -= f * a[c][k]
    return [a[i][n] / a[i][i] for i in range(n)]


def _y_projection(setup: ThetaSetup) -> tuple[list[tuple], list[int]]:
    """Coordinates holding the y-parts, and a Z-basis of the projected lattice."""
    alg = setup.algebra
    ycols = []
    for o, f in zip(alg.offsets(), alg.factors):
        ycols += list(range(o, o + f.fdim))
    proj = [[v[c] for c in ycols] for v in setup.lattice]
    # Z-basis of the projection: integer row reduction of the projected generators
    basis = _z_basis(proj)
    return basis, ycols


def _z_basis(gens: list[list[Fraction]]) -> list[tuple]:
    """A Z-basis of the Z-span of rational vectors."""
    den = 1
    for g in gens:
        for x in g:
            den = den * x.denominator // math.gcd(den, x.denominator)
    rows = [[int(x * den) for x in g] for g in gens]
    ncols = len(rows[0])
    out = []
    top = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(top, len(rows)) if rows[i][c] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(rows[i][c]))
            rows[top], rows[i0] = rows[i0], rows[top]
            clean = True
            for i in range(top + 1, len(rows)):
                if rows[i][c]:
                    q = rows[i][c] // rows[top][c]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[top])]
                    clean = clean and rows[i][c] == 0
            if clean:
                out.append(tuple(Fraction(x, den) for x in rows[top]))
                top += 1
                break
    return out


def _enumerate_box(basis: list[tuple], embed, bounds: list[float]):
    """All integer combinations of ``basis`` whose embeddings lie in the box."""
    n = len(basis)
    emb = [embed(b) for b in basis]  # each a list of floats, one per bound
    # coordinates c = inv(emb^T) y; |c_i| <= sum_j |inv_ij| bound_j
    M = [[emb[i][j] for i in range(n)] for j in range(n)]
    inv = _inverse_float(M)
    cmax = [int(sum(abs(inv[i][j]) * bounds[j] for j in range(n)) + 1e-6) + 1 for i in range(n)]
    for c in product(*[range(-k, k + 1) for k in cmax]):
        yield c


def _inverse_float(m: list[list[float]]) -> list[list[float]]:
    n = len(m)
    cols = [_solve_float(m, [float(i == j) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def norm_solutions(setup: ThetaSetup, m, factor: int | None = None) -> list[tuple]:
    """Unit-orbit representatives of ``{v in L : N(v) = m}``.

    Every orbit meets the centred fundamental parallelepiped of the unit
    logarithm lattice, which bounds all embeddings of v; the points in that
    box are found by scanning the y-projection of L and solving for z.
    Orbits are merged by exact comparison ``v' = u^a v``.  Returns [] unless
    m is totally positive.
    """
    alg = setup.algebra
    m = tuple(Fraction(x) for x in m)
    if factor is not None and len(alg.factors) != 1:
        raise ValueError("use the per-factor setup from split_setup_factors")
    if not alg.totally_positive(m):
        return []
    _check_unit_rank(setup)
    places = alg.places()
    logs = _unit_logs(setup)
    slack = [sum(abs(logs[k][p]) for k in range(len(logs))) for p in range(len(places))]
    # |v_sigma|, |v'_sigma| <= sqrt(m_sigma e^slack); |sigma(y)| is at most that bound
    ybounds = []
    for p, pl in enumerate(places):
        i, s = pl
        if alg.factors[i].place_type(s) != 1:
            raise ValueError("complex places are outside the supported range")
        ybounds.append(math.sqrt(alg.fval(m, pl) * math.exp(slack[p])) * (1 + 1e-9) + 1e-9)
    ybasis, ycols = _y_projection(setup)

    def yembed(y):
        out = []
        for pl in places:
            i, s = pl
            f = alg.factors[i]
            o = sum(ff.fdim for ff in alg.factors[:i])
            out.append(f.fval(tuple(y[o : o + f.fdim]), s))
        return out

    found: list[tuple] = []
    for c in _enumerate_box(ybasis, yembed, ybounds):
        y = [sum(ci * b[k] for ci, b in zip(c, ybasis)) for k in range(len(ycols))]
        yv = yembed(y)
        if any(abs(a) > b for a, b in zip(yv, ybounds)):
            continue
        # per factor solve z^2 = (y^2 - m) / delta
        zchoices = []
        ok = True
        o = 0
        for i, f in enumerate(alg.factors):
            yi = tuple(Fraction(x) for x in y[o : o + f.fdim])
            o += f.fdim
            rhs = f.fadd(f.fmul(yi, yi), f.fneg(alg.fparts(m)[i]))
            inv_delta = _finv(f, f.delta)
            roots = f.fsqrt(f.fmul(rhs, inv_delta))
            if not roots:
                ok = False
                break
            zchoices.append([(yi, z) for z in roots])
        if not ok:
            continue
        for combo in product(*zchoices):
            v = sum((f.join(yi, z) for f, (yi, z) in zip(alg.factors, combo)), ())
            if not in_lattice(setup.lattice, v):
                continue
            if setup.exclude is not None and in_lattice(setup.exclude, v):
                continue
            found.append(v)
    return _orbit_reps(setup, found, logs)


def _finv(f: Factor, a: FElt) -> FElt:
    if f.fdim == 1:
        return (1 / a[0],)
    n = a[0] * a[0] - f.d * a[1] * a[1]
    return (a[0] / n, -a[1] / n)


def _unit_power(setup: ThetaSetup, exps: Sequence[int]) -> tuple:
    alg = setup.algebra
    out = alg.one()
    for u, e in zip(setup.units, exps):
        base = u if e >= 0 else alg.conj(u)  # conj(u) = u^-1 for norm-one u
        for _ in range(abs(e)):
            out = alg.mul(out, base)
    return out


def _orbit_reps(setup: ThetaSetup, vs: list[tuple], logs) -> list[tuple]:
    alg = setup.algebra
    places = alg.places()
    T = [[logs[k][p] for k in range(len(logs))] for p in range(len(places))]

    def lv(v):
        return [math.log(abs(alg.factors[i].embed(alg.parts(v)[i], s)[0])) for i, s in places]

    reps: list[tuple] = []
    rep_logs: list[list[float]] = []
    for v in sorted(set(vs)):
        l = lv(v)
        same = False
        for r, lr in zip(reps, rep_logs):
            a = _solve_float(T, [x - y for x, y in zip(l, lr)]) if T else []
            ai = [round(x) for x in a]
            if any(abs(x - y) > 1e-6 for x, y in zip(a, ai)):
                continue
            if alg.mul(_unit_power(setup, ai), r) == v:
                same = True
                break
        if not same:
            reps.append(v)
            rep_logs.append(l)
    return reps


def orbit_weight(setup: ThetaSetup, v) -> int:
    """Product over split places of ``sign(v_sigma + v'_sigma)``, i.e. of the sign of ``sigma(y)``."""
    alg = setup.algebra
    w = 1
    for i, s in alg.places():
        f = alg.factors[i]
        if f.place_type(s) == 1:
            y, _ = f.split(alg.parts(v)[i])
            w *= f.fsign(y, s)
    return w


def hilbert_coefficient(setup: ThetaSetup, m) -> HilbertCoefficient:
    m = tuple(Fraction(x) for x in m)
    if setup.character != "trivial":
        raise ValueError("hilbert_coefficient supports the trivial character; use split_factor_series")
    alg = setup.algebra
    if not alg.totally_positive(m):
        return HilbertCoefficient(m, Fraction(0))
    total = sum(orbit_weight(setup, v) for v in norm_solutions(setup, m))
    return HilbertCoefficient(m, setup.kappa * total)


def norm_module(setup: ThetaSetup) -> list[tuple]:
    """A Z-basis of a module in F containing every relative norm of L."""
    alg = setup.algebra
    gens = []
    L = setup.lattice
    for i, v in enumerate(L):
        gens.append(alg.norm(v))
        for w in L[i + 1 :]:
            t = alg.relative_trace(alg.mul(v, alg.conj(w)))
            gens.append(t)
    return _z_basis([list(g) for g in gens])


def totally_positive_of_trace(setup: ThetaSetup, n: int) -> list[tuple]:
    """All totally positive m in the norm module with ``Tr_{F/Q}(alpha m) = n``."""
    alg = setup.algebra
    if not alg.totally_positive(setup.alpha):
        raise ValueError("the twist must be totally positive for a holomorphic expansion")
    basis = norm_module(setup)
    places = alg.places()
    # m_sigma in (0, n / alpha_sigma]
    bounds = [n / alg.fval(setup.alpha, pl) * (1 + 1e-9) + 1e-9 for pl in places]
    embed = lambda m: [alg.fval(m, pl) for pl in places]  # noqa: E731
    if len(basis) != len(places):
        raise ValueError("norm module does not have full rank")
    out = []
    for c in _enumerate_box(basis, embed, bounds):
        m = tuple(sum(ci * b[k] for ci, b in zip(c, basis)) for k in range(alg.fdim))
        if not alg.totally_positive(m):
            continue
        if alg.trace_to_q(alg.fmul(setup.alpha, m)) == n:
            out.append(m)
    return sorted(set(out))


def diagonal_restriction(setup: ThetaSetup, n_max: int, skip=None) -> QSeries:
    """Coefficient n is the sum of the coefficients at m with ``Tr(alpha m) = n``.

    ``skip`` may name indices that are not computed (left at 0).
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    coeffs = [Fraction(0)] * (n_max + 1)
    # constant term: m = 0 is never totally positive, so the sum is empty
    coeffs[0] = Fraction(0)
    for n in range(1, n_max + 1):
        if skip and n in skip:
            continue
        coeffs[n] = sum(
            (hilbert_coefficient(setup, m).value for m in totally_positive_of_trace(setup, n)),
            Fraction(0),
        )
    return QSeries(coeffs, n_max + 1, weight=setup.algebra.fdim, level=setup.meta.get("level", 1))


# ---------------------------------------------------------------------------
# product setups


def is_product(setup: ThetaSetup) -> bool:
    alg = setup.algebra
    pieces = _factor_sublattices(setup)
    if sum(len(p) for p in pieces) != len(setup.lattice):
        return False
    # the direct sum of the factor pieces must be all of L
    allv = [v for p in pieces for v in p]
    if not all(in_lattice(allv, b) for b in setup.lattice):
        return False
    for u in setup.units:
        if sum(1 for part, f in zip(alg.parts(u), alg.factors) if part != f.join(f.f(1), f.f(0))) > 1:
            return False
    return setup.exclude is None


def _factor_sublattices(setup: ThetaSetup) -> list[list[tuple]]:
    """Z-bases of ``L cap E_i`` embedded in E."""
    alg = setup.algebra
    out = []
    for i, o in enumerate(alg.offsets()):
        other = [k for k in range(alg.dim) if not (o <= k < o + alg.factors[i].dim)]
        rows = [[v[k] for k in other] for v in setup.lattice]
        ker = integer_kernel(rows) if other else [[int(a == b) for b in range(len(rows))] for a in range(len(rows))]
        vecs = [tuple(sum(c * v[k] for c, v in zip(kv, setup.lattice)) for k in range(alg.dim)) for kv in ker]
        out.append(_z_basis([list(v) for v in vecs]) if vecs else [])
    return out


def factor_setup(setup: ThetaSetup, index: int) -> ThetaSetup:
    """The single-factor setup carried by factor ``index`` of a product setup."""
    if not is_product(setup):
        raise ValueError("the lattice or unit group is not a product over the factors")
    alg = setup.algebra
    o, f = alg.offsets()[index], alg.factors[index]
    sl = slice(o, o + f.dim)
    fo = sum(ff.fdim for ff in alg.factors[:index])
    lat = [tuple(v[sl]) for v in _factor_sublattices(setup)[index]]
    units = []
    for u in setup.units:
        part = tuple(u[sl])
        if part != f.join(f.f(1), f.f(0)):
            units.append(part)
    sub = EtaleAlgebraData((f,), (alg.labels[index],) if alg.labels else ())
    char = setup.character
    if isinstance(char, (list, tuple)):
        char = char[index]
    return ThetaSetup(sub, tuple(setup.alpha[fo : fo + f.fdim]), lat, units, None, char, Fraction(1), dict(setup.meta))


def split_factor_series(setup: ThetaSetup, index: int, n_max: int) -> QSeries:
    """Diagonal restriction of one factor of a product setup."""
    fs = factor_setup(setup, index)
    if fs.character != "trivial":
        return class_weighted_series(fs, fs.character, n_max)
    return diagonal_restriction(fs, n_max)


def split_product_series(setup: ThetaSetup, n_max: int) -> QSeries:
    out = None
    for i in range(len(setup.algebra.factors)):
        s = split_factor_series(setup, i, n_max)
        out = s if out is None else out * s
    return out.scale(setup.kappa)


def class_weighted_series(fs: ThetaSetup, chi: ClassCharacter, n_max: int) -> QSeries:
    """``sum_C chi(C) theta_C`` for a real quadratic factor over Q.

    The lattice of class C is the ideal attached to a representative form
    ``[a, b, c]`` with ``a > 0``, with twist ``1/a`` so that the norm form is
    the quadratic form itself.
    """
    f = fs.algebra.factors[0]
    if f.d != 1:
        raise ValueError("class characters are supported for factors over Q only")
    delta = f.delta[0]
    if delta.denominator != 1:
        raise ValueError("delta must be an integer")
    D = int(delta)
    G = narrow_class_group(D if D % 4 == 1 else 4 * D)
    total = QSeries([0] * (n_max + 1), n_max + 1, 1, fs.meta.get("level", 1))
    for idx, form in enumerate(G.classes):
        g = _positive_rep(form)
        val = chi.real_value(idx)
        lat = _ideal_basis(g, D)
        sub = ThetaSetup(fs.algebra, (Fraction(1, g.a),), lat, fs.units, None, "trivial", 1, dict(fs.meta))
        total = total + diagonal_restriction(sub, n_max).scale(val)
    return total


def _positive_rep(form: QuadForm) -> QuadForm:
    if form.a > 0:
        return form
    # [a, b, c] ~ [c, -b, a] under S; then translate until the leading entry is positive
    for x in range(1, 200):
        for y in range(-200, 201):
            val = form(x, y)
            if val > 0 and math.gcd(x, y) == 1:
                # complete (x, y) to a matrix of determinant one
                g, u, w = _egcd(x, y)
                M = ((x, -w), (y, u))
                return form.act(M)
    raise RuntimeError("no positive value found")


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def _ideal_basis(form: QuadForm, D: int) -> list[tuple]:
    """Basis ``a, (-b + sqrt(disc))/2`` written in ``y + z sqrt(D)`` coordinates."""
    disc = form.disc
    k, d = squarefree_kernel(disc)
    if d != D and not (disc == 4 * D):
        raise ValueError("form discriminant does not match the factor")
    root_scale = Fraction(isqrt(disc // D))  # sqrt(disc) = root_scale * sqrt(D)
    return [(Fraction(form.a), Fraction(0)), (Fraction(-form.b, 2), root_scale / 2)]


# ---------------------------------------------------------------------------
# concrete setups for pairs of real quadratic fields at a split prime


def _embedding(D: int, p: int) -> tuple[QuadForm, Matrix]:
    h = heegner_form(D, p)
    r, N = h.form.b, h.form.a
    return h.form, ((-r, -2), (2 * N, r))


def _mat_lin(coeffs, mats) -> list[list[Fraction]]:
    out = [[Fraction(0)] * 2 for _ in range(2)]
    for c, M in zip(coeffs, mats):
        for i in range(2):
            for j in range(2):
                out[i][j] += Fraction(c) * M[i][j]
    return out


def _vec(M) -> list[Fraction]:
    return [Fraction(M[0][0]), Fraction(M[0][1]), Fraction(M[1][0]), Fraction(M[1][1])]


def _mat2_q(x, y) -> Fraction:
    """``Tr(x y^*)`` on 2x2 matrices."""
    ya = ((y[1][1], -y[0][1]), (-y[1][0], y[0][0]))
    return sum(x[i][k] * ya[k][i] for i in range(2) for k in range(2))


@dataclass
class Mat2Model:
    """The identification of E with Mat_2(Q) through a module generator v0."""

    algebra: EtaleAlgebraData
    images: list  # images of the Q-basis of E (as 2x2 rational matrices)
    to_e: list[list[Fraction]]  # matrix coordinates (a, b, c, d) -> E coordinates

    def matrix(self, v) -> list[list[Fraction]]:
        return _mat_lin(v, self.images)

    def element(self, M) -> tuple:
        return tuple(mat_vec(self.to_e, _vec(M)))

    def gram(self) -> list[list[Fraction]]:
        return [[_mat2_q(x, y) for y in self.images] for x in self.images]


def _tensor_images(phi1: Matrix, phi2: Matrix, v0) -> list:
    """Images of ``1, s1, s2, s1 s2`` under ``l1 (x) l2 -> phi1(l1) v0 phi2(l2)^*``."""
    I = ((1, 0), (0, 1))
    a1 = [I, phi1]
    a2 = [I, mat_adj(phi2)]
    out = []
    for x2 in a2:
        for x1 in a1:
            out.append(mat_mul(mat_mul(x1, v0), x2))
    # order: 1, s1, s2, s1 s2
    return [out[0], out[1], out[2], out[3]]


def _model(algebra, coords_of_basis, images) -> Mat2Model:
    """Build the model given the E-coordinates of ``1, s1, s2, s1 s2`` and their images."""
    # E-coordinates -> tensor coordinates
    T = transpose(coords_of_basis)  # columns are tensor basis vectors in E coordinates
    tinv = inverse(T)  # E coords -> tensor coords
    img = [_vec(M) for M in images]
    Mt = transpose(img)  # tensor coords -> matrix coords
    if abs(_det_float([[float(x) for x in r] for r in Mt])) < 1e-12:
        raise ValueError("the chosen vector does not generate Mat_2(Q) as a module")
    to_tensor = inverse(Mt)
    to_e = [[sum(T[i][k] * to_tensor[k][j] for k in range(4)) for j in range(4)] for i in range(4)]
    # images of the E basis vectors themselves
    e_images = []
    for b in algebra.basis():
        tc = mat_vec(tinv, b)
        e_images.append(_mat_lin(tc, images))
    return Mat2Model(algebra, e_images, to_e)


def _level_lattice(model: Mat2Model, p: int) -> tuple[list[tuple], list[tuple]]:
    """E-bases of ``{p | c}`` and of ``{p | a, p | c}`` inside integer matrices."""
    full = [((1, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (p, 0)), ((0, 0), (0, 1))]
    sub = [((p, 0), (0, 0)), ((0, 1), (0, 0)), ((0, 0), (p, 0)), ((0, 0), (0, 1))]
    return [model.element(M) for M in full], [model.element(M) for M in sub]


def _unit_element(A: Matrix, form: QuadForm) -> tuple[Fraction, Fraction]:
    """``x + y sqrt(D)`` with ``A = x I + y phi(sqrt D)``."""
    x = Fraction(A[0][0] + A[1][1], 2)
    y = Fraction(A[1][0], 2 * form.a)
    return x, y


def biquadratic_setup(D1: int, D2: int, p: int, v0: Matrix = ((1, 0), (0, 1))) -> tuple[ThetaSetup, Mat2Model]:
    """The field case ``E = Q(sqrt D1, sqrt D2)`` over ``F = Q(sqrt(D1 D2))``."""
    k, d = squarefree_kernel(D1 * D2)
    if d == 1:
        raise ValueError("D1 D2 is a square: use split_setup")
    f1, phi1 = _embedding(D1, p)
    f2, phi2 = _embedding(D2, p)
    fac = Factor(d, (Fraction(D1), Fraction(0)))
    alg = EtaleAlgebraData((fac,), (f"Q(sqrt{D1},sqrt{D2})/Q(sqrt{d})",))
    # E coordinates (y0, y1, z0, z1) of 1, sqrt D1, sqrt D2, sqrt D1 sqrt D2
    # sqrt D2 = (k sqrt d / D1) * sqrt D1 and sqrt D1 sqrt D2 = k sqrt d
    F0 = Fraction(0)
    coords = [
        (Fraction(1), F0, F0, F0),
        (F0, F0, Fraction(1), F0),
        (F0, F0, F0, Fraction(k, D1)),
        (F0, Fraction(k), F0, F0),
    ]
    model = _model(alg, coords, _tensor_images(phi1, phi2, v0))
    alpha = compute_alpha(model.gram(), alg)
    lat, sub = _level_lattice(model, p)
    A1, A2 = gamma0_automorph(f1, p), gamma0_automorph(f2, p)
    x1, y1 = _unit_element(A1, f1)
    x2, y2 = _unit_element(A2, f2)
    # eta1 (x) 1 = x1 + y1 sqrt D1 ; 1 (x) eta2 = x2 + y2 sqrt D2
    u1 = (x1, F0, y1, F0)
    u2 = (x2, F0, F0, y2 * Fraction(k, D1))
    setup = ThetaSetup(
        alg, alpha, lat, [u1, u2], sub, "trivial", Fraction(1),
        {"D1": D1, "D2": D2, "p": p, "level": p, "v0": [list(r) for r in v0],
         "forms": [str(f1), str(f2)]},
    )
    return setup, model


def split_setup(D: int, p: int, v0: Matrix | None = None) -> tuple[ThetaSetup, Mat2Model]:
    """The split case ``E = Q(sqrt D) (x) Q(sqrt D) = Q(sqrt D) x Q(sqrt D)`` over ``F = Q x Q``.

    The identity matrix is not a module generator here, so ``v0`` defaults
    to the first small integer matrix that generates and gives a totally
    positive twist.
    """
    f, phi = _embedding(D, p)
    k, d = squarefree_kernel(D)
    fac = Factor(1, (Fraction(D),))
    alg = EtaleAlgebraData((fac, fac), (f"Q(sqrt{D})", f"Q(sqrt{D})"))
    F0, F1 = Fraction(0), Fraction(1)
    # l1 (x) l2 -> (l1 l2, l1 l2'); coordinates (y1, z1, y2, z2) with theta = sqrt D
    coords = [
        (F1, F0, F1, F0),
        (F0, F1, F0, F1),
        (F0, F1, F0, -F1),
        (Fraction(D), F0, Fraction(-D), F0),
    ]
    candidates = [v0] if v0 is not None else _small_matrices()
    last_err = None
    for w in candidates:
        try:
            model = _model(alg, coords, _tensor_images(phi, phi, w))
            alpha = compute_alpha(model.gram(), alg)
        except (ValueError, ZeroDivisionError) as e:
            last_err = e
            continue
        if not alg.totally_positive(alpha):
            last_err = ValueError("twist not totally positive")
            continue
        lat, sub = _level_lattice(model, p)
        A = gamma0_automorph(f, p)
        x, y = _unit_element(A, f)
        # eta (x) 1 -> (eta, eta); 1 (x) eta -> (eta, eta')
        u1 = (x, y, x, y)
        u2 = (x, y, x, -y)
        setup = ThetaSetup(
            alg, alpha, lat, [u1, u2], sub, "trivial", Fraction(1),
            {"D1": D, "D2": D, "p": p, "level": p, "v0": [list(r) for r in w], "forms": [str(f), str(f)]},
        )
        return setup, model
    raise ValueError(f"no usable module generator: {last_err}")


def _small_matrices():
    vals = [0, 1, -1, 2]
    for a, b, c, dd in product(vals, repeat=4):
        yield ((a, b), (c, dd))


def product_subsetup(setup: ThetaSetup) -> ThetaSetup:
    """The product lattice ``(L cap E_1) + ... + (L cap E_r)`` with per-factor unit groups.

    Each factor's unit group is generated by the factor components of the
    given units restricted to that factor.  The excluded sublattice is
    dropped, which changes nothing at indices prime to the level.
    """
    alg = setup.algebra
    pieces = _factor_sublattices(setup)
    lat = [v for p in pieces for v in p]
    units = []
    for i, (o, f) in enumerate(zip(alg.offsets(), alg.factors)):
        # use the first unit whose i-th component is nontrivial
        for u in setup.units:
            part = alg.parts(u)[i]
            if part != f.join(f.f(1), f.f(0)):
                full = list(alg.one())
                full[o : o + f.dim] = part
                units.append(tuple(full))
                break
    return ThetaSetup(alg, setup.alpha, lat, units, None, setup.character, setup.kappa, dict(setup.meta))
