"""Exact truncated q-expansions and the linear algebra used to compare them."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .linalg import bareiss_rank, rref


class InconsistentSeries(RuntimeError):
    """Agreement up to the Sturm bound but disagreement beyond it."""


class InsufficientPrecision(ValueError):
    pass


@dataclass
class QSeries:
    """Coefficients of q^0 .. q^(prec-1); everything past ``prec`` is unknown."""

    coeffs: list[Fraction]
    prec: int
    weight: int = 0
    level: int = 1

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs[: self.prec]]
        cs += [Fraction(0)] * (self.prec - len(cs))
        self.coeffs = cs

    def __getitem__(self, n: int) -> Fraction:
        if not 0 <= n < self.prec:
            raise IndexError(f"coefficient {n} is beyond precision {self.prec}")
        return self.coeffs[n]

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return (self.prec, self.coeffs, self.weight, self.level) == (
            other.prec, other.coeffs, other.weight, other.level
        )

    def truncate(self, prec: int) -> "QSeries":
        return QSeries(self.coeffs[: min(prec, self.prec)], min(prec, self.prec), self.weight, self.level)

    def __add__(self, other: "QSeries") -> "QSeries":
        p = min(self.prec, other.prec)
        return QSeries([a + b for a, b in zip(self.coeffs[:p], other.coeffs[:p])], p, self.weight, self.level)

    def __neg__(self) -> "QSeries":
        return QSeries([-a for a in self.coeffs], self.prec, self.weight, self.level)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def scale(self, k) -> "QSeries":
        k = Fraction(k)
        return QSeries([k * a for a in self.coeffs], self.prec, self.weight, self.level)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return qs_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def to_text(self) -> str:
        lines = [f"# qseries weight={self.weight} level={self.level} prec={self.prec}"]
        for i, c in enumerate(self.coeffs):
            lines.append(f"{i} {c.numerator}/{c.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QSeries":
        series = read_blocks(text)
        if len(series) != 1:
            raise ValueError(f"expected one q-series block, found {len(series)}")
        return series[0]


def qs_mul(f: QSeries, g: QSeries) -> QSeries:
    """Cauchy product truncated to the smaller precision; weights add."""
    p = min(f.prec, g.prec)
    out = [Fraction(0)] * p
    for i, a in enumerate(f.coeffs[:p]):
        if not a:
            continue
        for j in range(p - i):
            b = g.coeffs[j]
            if b:
                out[i + j] += a * b
    return QSeries(out, p, f.weight + g.weight, max(f.level, g.level))


def _parse_header(line: str) -> dict[str, int]:
    parts = line[1:].split()
    if not parts or parts[0] != "qseries":
        raise ValueError(f"bad q-series header: {line!r}")
    meta = {}
    for p in parts[1:]:
        k, _, v = p.partition("=")
        meta[k] = int(v)
    for k in ("weight", "level", "prec"):
        if k not in meta:
            raise ValueError(f"header lacks {k}: {line!r}")
    return meta


def read_blocks(text: str) -> list[QSeries]:
    out = []
    for block in text.split("\n\n"):
        lines = [ln.strip() for ln in block.strip().splitlines() if ln.strip()]
        if not lines:
            continue
        meta = _parse_header(lines[0])
        coeffs = [Fraction(0)] * meta["prec"]
        for ln in lines[1:]:
            idx, val = ln.split()
            i = int(idx)
            if not 0 <= i < meta["prec"]:
                raise ValueError(f"index {i} outside precision {meta['prec']}")
            coeffs[i] = Fraction(val)
        out.append(QSeries(coeffs, meta["prec"], meta["weight"], meta["level"]))
    return out


def write_blocks(series: Iterable[QSeries]) -> str:
    return "\n".join(s.to_text() for s in series)


@dataclass
class BasisFile:
    series: list[QSeries] = field(default_factory=list)

    @property
    def prec(self) -> int:
        return min(s.prec for s in self.series)

    @classmethod
    def load(cls, path: str | Path) -> "BasisFile":
        return cls(read_blocks(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(write_blocks(self.series))


def bundled_basis(name: str = "s2_gamma0_11.qseries") -> BasisFile:
    text = resources.files("seesaw").joinpath("data", name).read_text()
    return BasisFile(read_blocks(text))


def eta_quotient(factors: Sequence[tuple[int, int]], level: int, prec: int) -> QSeries:
    """``q^(sum d e / 24) * prod_d prod_n (1 - q^(d n))^e`` to precision ``prec``."""
    shift24 = sum(d * e for d, e in factors)
    if shift24 % 24:
        raise ValueError(f"leading exponent {shift24}/24 is not an integer")
    shift = shift24 // 24
    weight2 = sum(e for _, e in factors)
    if shift < 0:
        raise ValueError("negative leading exponent")
    inner = prec - shift
    coeffs = [Fraction(0)] * max(inner, 0)
    if inner > 0:
        coeffs[0] = Fraction(1)
    for d, e in factors:
        for k in range(1, inner):
            step = d * k
            if step >= inner:
                break
            for _ in range(abs(e)):
                if e > 0:
                    # multiply by (1 - q^step)
                    for i in range(inner - 1, step - 1, -1):
                        coeffs[i] -= coeffs[i - step]
                else:
                    # divide by (1 - q^step)
                    for i in range(step, inner):
                        coeffs[i] += coeffs[i - step]
    full = [Fraction(0)] * shift + coeffs
    weight = weight2 // 2 if weight2 % 2 == 0 else 0
    return QSeries(full[:prec], prec, weight, level)


def sturm_bound(k: int, N: int) -> int:
    """``floor(k * mu / 12) + 1`` with mu the index of Gamma_0(N) in SL_2(Z)."""
    if k < 1 or N < 1:
        raise ValueError("weight and level must be positive")
    mu = Fraction(N)
    m, p = N, 2
    while p * p <= m:
        if m % p == 0:
            mu *= Fraction(p + 1, p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        mu *= Fraction(m + 1, m)
    return int(k * mu // 12) + 1


@dataclass(frozen=True)
class Membership:
    coordinates: list[Fraction] | None
    witness: int | None = None
    certified: bool = True  # False when skipped indices leave the Sturm range incomplete

    @property
    def member(self) -> bool:
        return self.coordinates is not None


def membership(f: QSeries, basis: BasisFile | Sequence[QSeries], skip: Iterable[int] = ()) -> Membership:
    """Coordinates of f in the basis, decided at the Sturm bound.

    The coordinates are then checked against every coefficient that both
    sides know.  Agreement below the bound but not above it raises
    :class:`InconsistentSeries`.  Indices in ``skip`` are ignored on both
    sides; if one of them lies within the Sturm range the answer is a
    consistency check on the remaining indices and is marked uncertified.
    """
    bs = list(basis.series if isinstance(basis, BasisFile) else basis)
    if not bs:
        raise ValueError("empty basis")
    k, N = bs[0].weight, bs[0].level
    bound = sturm_bound(k, N)
    prec = min([f.prec] + [b.prec for b in bs])
    if prec < bound + 1:
        raise InsufficientPrecision(f"precision {prec} is below the Sturm bound {bound} (+1 for q^0)")
    skip = set(skip)
    certified = not any(i <= bound for i in skip)
    # without certification every compared index enters the linear system
    top = bound + 1 if certified else prec
    idx = [i for i in range(top) if i not in skip]
    rows = [[b.coeffs[i] for b in bs] + [f.coeffs[i]] for i in idx]
    red, pivots = rref(rows)
    nb = len(bs)
    if nb in pivots:
        # inconsistent: find the first coefficient index that cannot be matched
        for upto in range(1, len(rows) + 1):
            _, pv = rref(rows[:upto])
            if nb in pv:
                return Membership(None, idx[upto - 1], certified)
    coords = [Fraction(0)] * nb
    for r, c in enumerate(pivots):
        coords[c] = red[r][nb]
    for i in range(prec):
        if i in skip:
            continue
        val = sum(coords[j] * bs[j].coeffs[i] for j in range(nb))
        if val != f.coeffs[i]:
            raise InconsistentSeries(f"coefficients agree through the Sturm bound but differ at q^{i}")
    return Membership(coords, None, certified)


def span_rank(fs: Sequence[QSeries]) -> int:
    """Rank of the coefficient matrix of a family of series with common metadata."""
    if not fs:
        return 0
    meta = {(s.weight, s.level) for s in fs}
    if len(meta) > 1:
        raise ValueError(f"mixed weight/level metadata {sorted(meta)}")
    k, N = meta.pop()
    prec = min(s.prec for s in fs)
    if k >= 1 and prec < sturm_bound(k, N) + 1:
        raise InsufficientPrecision("precision below the Sturm bound")
    return bareiss_rank([s.coeffs[:prec] for s in fs])
