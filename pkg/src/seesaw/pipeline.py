"""End-to-end computations: geometric and arithmetic generating series and their comparison."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from .geodesics import GeodesicCycle, WeightedCycle
from .hecke import hecke_pair
from .quadforms import (
    ClassCharacter,
    characters,
    heegner_form,
    heegner_root,
    is_valid_disc,
    narrow_class_group,
)
from .qseries import QSeries
from .theta import (
    ThetaSetup,
    biquadratic_setup,
    diagonal_restriction,
    product_subsetup,
    split_product_series,
    split_setup,
)


class ConfigError(ValueError):
    """A configuration that is rejected before any computation starts."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def validate_pair(D1: int, D2: int, p: int, n_max: int | None = None) -> None:
    for D in (D1, D2):
        if not is_valid_disc(D):
            raise ConfigError(f"{D} is not a valid discriminant (need D > 0, D = 0,1 mod 4, non-square)")
    if not is_prime(p):
        raise ConfigError(f"p={p} is not prime")
    for D in (D1, D2):
        try:
            heegner_root(D, p)
        except ValueError as e:
            raise ConfigError(f"p not split: {p} does not split for D={D}") from e
    if n_max is not None and n_max < 1:
        raise ConfigError("nmax must be at least 1")


def skipped_indices(n_max: int, p: int, D1: int, D2: int) -> list[int]:
    """Indices n <= n_max excluded by the rule gcd(n, p D1 D2) = 1."""
    bad = p * D1 * D2
    return [n for n in range(1, n_max + 1) if gcd(n, bad) != 1]


# ---------------------------------------------------------------------------
# characters


def parse_character(selector: str | None) -> tuple[int | None, int | None]:
    """``"trivial"`` or ``"i,j"`` (character indices for the first and second discriminant)."""
    if selector is None or selector == "trivial":
        return None, None
    parts = [s.strip() for s in selector.split(",")]
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2 or not all(s.lstrip("-").isdigit() for s in parts):
        raise ConfigError(f"character selector {selector!r} is not 'trivial' or 'i,j'")
    return int(parts[0]), int(parts[1])


def class_character(D: int, index: int | None) -> ClassCharacter | None:
    if index is None:
        return None
    G = narrow_class_group(D)
    chars = characters(G)
    if not 0 <= index < len(chars):
        raise ConfigError(f"character index {index} out of range: D={D} has {len(chars)} characters")
    chi = chars[index]
    if not chi.is_real():
        raise ConfigError("only real (quadratic or trivial) characters are supported")
    return None if chi.is_trivial() else chi


def twisted_cycle(D: int, p: int, chi: ClassCharacter | None) -> WeightedCycle:
    """``sum_k chi(k) gamma_k`` over the narrow classes, or the principal cycle when chi is trivial."""
    if chi is None:
        return WeightedCycle([(1, GeodesicCycle(heegner_form(D, p).form, p))])
    G = narrow_class_group(D)
    return WeightedCycle(
        [(chi.real_value(k), GeodesicCycle(heegner_form(D, p, klass=k).form, p)) for k in range(G.order)]
    )


# ---------------------------------------------------------------------------
# geometric side


def _geo_coeff(args) -> tuple[int, Fraction]:
    w1, n, w2 = args
    return n, Fraction(hecke_pair(w1, n, w2))


def geometric_series(D1: int, D2: int, p: int, n_max: int, character: str | None = "trivial",
                     jobs: int = 1) -> tuple[QSeries, list[int]]:
    """``sum_n <gamma_1, T_n gamma_2> q^n`` with excluded indices left at 0."""
    validate_pair(D1, D2, p, n_max)
    i1, i2 = parse_character(character)
    w1 = twisted_cycle(D1, p, class_character(D1, i1))
    w2 = twisted_cycle(D2, p, class_character(D2, i2))
    skipped = skipped_indices(n_max, p, D1, D2)
    todo = [(w1, n, w2) for n in range(1, n_max + 1) if n not in skipped]
    coeffs = [Fraction(0)] * (n_max + 1)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_geo_coeff, todo))
    else:
        results = [_geo_coeff(t) for t in todo]
    for n, v in results:
        coeffs[n] = v
    return QSeries(coeffs, n_max + 1, weight=2, level=p), skipped


# ---------------------------------------------------------------------------
# arithmetic side


def arithmetic_setup(D1: int, D2: int, p: int, character: str | None = "trivial",
                     kappa: Fraction | int | str = 1) -> ThetaSetup:
    """The configured theta setup: split product lattice when D1 = D2, biquadratic otherwise."""
    validate_pair(D1, D2, p)
    i1, i2 = parse_character(character)
    kappa = Fraction(kappa)
    if kappa <= 0:
        raise ConfigError("kappa must be a positive rational")
    if D1 == D2:
        setup = product_subsetup(split_setup(D1, p)[0])
        chis = [class_character(D1, i1), class_character(D2, i2)]
        if any(c is not None for c in chis):
            setup.character = [c if c is not None else "trivial" for c in chis]
    else:
        if i1 is not None or i2 is not None:
            if class_character(D1, i1) is not None or class_character(D2, i2) is not None:
                raise ConfigError(
                    "nontrivial characters are supported only in the split case D1 = D2; "
                    "the biquadratic torus class group is not a product of the factor class groups"
                )
        setup = biquadratic_setup(D1, D2, p)[0]
    setup.kappa = kappa
    return setup


def arithmetic_series(D1: int, D2: int, p: int, n_max: int, character: str | None = "trivial",
                      kappa: Fraction | int | str = 1, setup: ThetaSetup | None = None) -> tuple[QSeries, list[int]]:
    """Diagonal restriction of the configured setup, excluded indices set to 0."""
    validate_pair(D1, D2, p, n_max)
    skipped = skipped_indices(n_max, p, D1, D2)
    if setup is None:
        setup = arithmetic_setup(D1, D2, p, character, kappa)
    if setup.exclude is None and len(setup.algebra.factors) > 1:
        full = split_product_series(setup, n_max)
        coeffs = [Fraction(0) if n in skipped else full[n] for n in range(n_max + 1)]
        s = QSeries(coeffs, n_max + 1, full.weight, p)
    else:
        s = diagonal_restriction(setup, n_max, skip=set(skipped)).scale(setup.kappa)
        s.level = p
    return s, skipped


# ---------------------------------------------------------------------------
# comparison


@dataclass
class SeesawResult:
    status: str  # "ok", "mismatch" or "vacuous"
    ratio: Fraction | None
    first_mismatch: int | None
    compared: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status != "mismatch"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "lambda": None if self.ratio is None else str(self.ratio),
            "first_mismatch": self.first_mismatch,
            "compared": self.compared,
        }


def compare_series(geo: QSeries, ari: QSeries, skipped: Sequence[int] = ()) -> SeesawResult:
    """Find one rational lambda with ``geo = lambda * ari`` on every compared index.

    Lambda is fixed by the first index where either side is nonzero.  An
    index where only one side vanishes is a mismatch.
    """
    prec = min(geo.prec, ari.prec)
    compared = [n for n in range(prec) if n not in skipped]
    lam = None
    for n in compared:
        g, a = geo[n], ari[n]
        if g == 0 and a == 0:
            continue
        if lam is None:
            if a == 0 or g == 0:
                return SeesawResult("mismatch", None, n, compared)
            lam = g / a
            continue
        if g != lam * a:
            return SeesawResult("mismatch", lam, n, compared)
    if lam is None:
        return SeesawResult("vacuous", None, None, compared)
    return SeesawResult("ok", lam, None, compared)
