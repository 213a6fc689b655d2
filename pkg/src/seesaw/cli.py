"""Command-line interface.

Exit codes: 0 success, 1 verification failed, 2 usage or configuration error.
"""

from __future__ import annotations

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import pipeline
from .geodesics import (
    GeodesicCycle,
    fundamental_arc,
    intersection_number,
    intersection_number_oracle,
)
from .pipeline import ConfigError
from .qseries import (
    BasisFile,
    InconsistentSeries,
    InsufficientPrecision,
    QSeries,
    bundled_basis,
    membership,
    read_blocks,
    span_rank,
)
from .quadforms import (
    characters,
    class_representatives,
    heegner_form,
    is_odd,
    narrow_class_group,
    reversal_class,
)
from .report import rows_to_csv, series_rows, write_report

COMMANDS = (
    "classgroup", "heegner", "geodesic", "intersect", "series-geometric", "series-arithmetic",
    "verify-seesaw", "verify-cusp", "span-rank", "selftest",
)


def _load_config(ctx: click.Context, _param, value):
    """Turn a JSON config file into click defaults, so explicit flags still win.

    Top-level keys apply to every command; a key named after a command holds
    settings for that command only.
    """
    if not value:
        return value
    try:
        data = json.loads(Path(value).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise click.BadParameter(f"cannot read config: {e}") from e
    if not isinstance(data, dict):
        raise click.BadParameter("config must be a JSON object")
    flat = {k: v for k, v in data.items() if k not in COMMANDS}
    ctx.default_map = {cmd: _param_names(cmd, {**flat, **data.get(cmd, {})}) for cmd in COMMANDS}
    return value


def _param_names(cmd: str, values: dict) -> dict:
    """Map option spellings (``report``, ``--report``, ``report_dir``) to parameter names."""
    names = {}
    for param in main.commands[cmd].params:
        names[param.name] = param.name
        for opt in param.opts:
            names[opt.lstrip("-").replace("-", "_")] = param.name
    return {names.get(k.lstrip("-").replace("-", "_"), k): v for k, v in values.items()}


@click.group()
@click.option("--config", type=click.Path(dir_okay=False), callback=_load_config, is_eager=True,
              expose_value=False, help="JSON file of default option values.")
def main():
    """Compare geodesic intersection series with theta series."""


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _fail_config(e: Exception):
    raise click.UsageError(str(e))


def _fracs(xs) -> list[str]:
    return [str(Fraction(x)) for x in xs]


def _write_series(s: QSeries, out: str | None, fmt: str, skipped) -> str | None:
    if out is None:
        return None
    if fmt == "qseries":
        text = s.to_text()
    elif fmt == "json":
        text = json.dumps(
            {"weight": s.weight, "level": s.level, "prec": s.prec, "coefficients": _fracs(s.coeffs),
             "skipped": list(skipped)},
            indent=2, sort_keys=True,
        ) + "\n"
    else:
        text = rows_to_csv(series_rows({"coefficient": s}, skipped))
    Path(out).write_text(text)
    return out


def _series_summary(command: str, s: QSeries, skipped, **params) -> dict:
    return {
        "command": command,
        **params,
        "weight": s.weight,
        "level": s.level,
        "prec": s.prec,
        "coefficients": _fracs(s.coeffs),
        "skipped": list(skipped),
    }


def _cycle(D: int, p: int, klass: int | None) -> GeodesicCycle:
    if p == 1:
        reps = class_representatives(D)
        k = klass or 0
        if not 0 <= k < len(reps):
            raise ConfigError(f"class index {k} out of range: D={D} has {len(reps)} classes")
        return GeodesicCycle(reps[k], 1)
    if not pipeline.is_prime(p):
        raise ConfigError(f"p={p} is not prime")
    return GeodesicCycle(heegner_form(D, p, klass=klass).form, p)


# common options

d1_opt = click.option("--d1", type=int, required=True, help="First discriminant.")
d2_opt = click.option("--d2", type=int, required=True, help="Second discriminant.")
p_opt = click.option("--p", "p", type=int, default=11, show_default=True, help="Split prime (the level).")
nmax_opt = click.option("--nmax", type=int, default=15, show_default=True, help="Highest coefficient index.")
char_opt = click.option("--character", default="trivial", show_default=True,
                        help="'trivial' or 'i,j': indices of real class characters for d1 and d2.")
kappa_opt = click.option("--kappa", default="1", show_default=True, help="Positive rational normalization.")
out_opt = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file.")
fmt_opt = click.option("--format", "fmt", type=click.Choice(["json", "csv", "qseries"]), default="qseries",
                       show_default=True, help="Format of the --out file.")
jobs_opt = click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
seed_opt = click.option("--seed", type=int, default=20240611, show_default=True, help="Random seed.")
report_opt = click.option("--report", "report_dir", type=click.Path(file_okay=False), default=None,
                          help="Directory for the report files.")


@main.command()
@d1_opt
def classgroup(d1):
    """Narrow class group of a fundamental discriminant with its characters."""
    try:
        G = narrow_class_group(d1)
    except ValueError as e:
        _fail_config(e)
    chars = characters(G)
    _emit({
        "disc": G.disc,
        "h_plus": G.order,
        "classes": [f.as_list() for f in G.classes],
        "table": G.table,
        "characters": [c.as_json() for c in chars],
        "odd": [is_odd(c, G) for c in chars],
        "reversal_class": reversal_class(G),
    })


@main.command()
@d1_opt
@p_opt
@click.option("--class", "klass", type=int, default=None, help="Narrow class index.")
def heegner(d1, p, klass):
    """A Heegner form of discriminant d1 at the prime p."""
    try:
        if not pipeline.is_prime(p):
            raise ConfigError(f"p={p} is not prime")
        h = heegner_form(d1, p, klass=klass)
    except ValueError as e:
        _fail_config(e)
    _emit({"D": d1, "p": h.p, "r": h.r, "form": h.form.as_list()})


@main.command()
@d1_opt
@p_opt
@click.option("--class", "klass", type=int, default=None, help="Class index.")
def geodesic(d1, p, klass):
    """The closed geodesic of a class: form, endpoints, automorph, one period."""
    try:
        c = _cycle(d1, p, klass)
    except ValueError as e:
        _fail_config(e)
    arc = fundamental_arc(c)
    (s0, s1, D), (t0, t1, _) = c.endpoints()
    _emit({
        "form": c.form.as_list(),
        "level": c.level,
        "disc": D,
        "source": [str(s0), str(s1)],
        "target": [str(t0), str(t1)],
        "automorph": [list(r) for r in c.automorph],
        "arc": {"start": arc.start.as_json(), "end": arc.end.as_json()},
    })


@main.command()
@d1_opt
@d2_opt
@p_opt
@click.option("--class1", type=int, default=None)
@click.option("--class2", type=int, default=None)
@click.option("--oracle/--no-oracle", default=False, help="Also run the tile-walk oracle.")
def intersect(d1, d2, p, class1, class2, oracle):
    """Signed intersection number of two class geodesics on Y_0(p) (p=1 for the full modular group)."""
    try:
        c1, c2 = _cycle(d1, p, class1), _cycle(d2, p, class2)
    except ValueError as e:
        _fail_config(e)
    rep = intersection_number(c1, c2)
    out = {"c1": c1.form.as_list(), "c2": c2.form.as_list(), "level": p, **rep.as_dict()}
    status = 0
    if oracle:
        o = intersection_number_oracle(c1, c2)
        agree = (o.plus, o.minus) == (rep.plus, rep.minus)
        out["oracle"] = {"plus": o.plus, "minus": o.minus, "net": o.net, "agree": agree}
        status = 0 if agree else 1
    _emit(out)
    sys.exit(status)


@main.command("series-geometric")
@d1_opt
@d2_opt
@p_opt
@nmax_opt
@char_opt
@out_opt
@fmt_opt
@jobs_opt
def series_geometric(d1, d2, p, nmax, character, out, fmt, jobs):
    """Coefficients <gamma_1, T_n gamma_2> for n = 1..nmax."""
    try:
        s, skipped = pipeline.geometric_series(d1, d2, p, nmax, character, jobs)
    except ValueError as e:
        _fail_config(e)
    _write_series(s, out, fmt, skipped)
    _emit(_series_summary("series-geometric", s, skipped, d1=d1, d2=d2, p=p, nmax=nmax,
                          character=character, out=out))


@main.command("series-arithmetic")
@d1_opt
@d2_opt
@p_opt
@nmax_opt
@char_opt
@kappa_opt
@click.option("--setup", "setup_path", type=click.Path(dir_okay=False, exists=True), default=None,
              help="ThetaSetup JSON to use instead of the built-in construction.")
@out_opt
@fmt_opt
def series_arithmetic(d1, d2, p, nmax, character, kappa, setup_path, out, fmt):
    """Diagonal restriction of the theta setup attached to (d1, d2, p)."""
    from .theta import ThetaSetup

    try:
        setup = None
        if setup_path:
            setup = ThetaSetup.from_json(Path(setup_path).read_text())
            setup.check()
        s, skipped = pipeline.arithmetic_series(d1, d2, p, nmax, character, kappa, setup)
    except (ValueError, KeyError) as e:
        _fail_config(e)
    _write_series(s, out, fmt, skipped)
    _emit(_series_summary("series-arithmetic", s, skipped, d1=d1, d2=d2, p=p, nmax=nmax,
                          character=character, kappa=str(Fraction(kappa)), out=out))


def _load_one(path: str) -> QSeries:
    blocks = read_blocks(Path(path).read_text())
    if len(blocks) != 1:
        raise ConfigError(f"{path}: expected one q-series block, found {len(blocks)}")
    return blocks[0]


@main.command("verify-seesaw")
@d1_opt
@d2_opt
@p_opt
@nmax_opt
@char_opt
@kappa_opt
@click.option("--geometric", "geo_path", type=click.Path(dir_okay=False, exists=True), default=None,
              help="Precomputed geometric series (q-series file).")
@click.option("--arithmetic", "ari_path", type=click.Path(dir_okay=False, exists=True), default=None,
              help="Precomputed arithmetic series (q-series file).")
@jobs_opt
@report_opt
def verify_seesaw(d1, d2, p, nmax, character, kappa, geo_path, ari_path, jobs, report_dir):
    """Check geometric = lambda * arithmetic for a single rational lambda."""
    try:
        pipeline.validate_pair(d1, d2, p, nmax)
        skipped = pipeline.skipped_indices(nmax, p, d1, d2)
        geo = _load_one(geo_path) if geo_path else pipeline.geometric_series(d1, d2, p, nmax, character, jobs)[0]
        ari = _load_one(ari_path) if ari_path else pipeline.arithmetic_series(d1, d2, p, nmax, character, kappa)[0]
    except ValueError as e:
        _fail_config(e)
    res = pipeline.compare_series(geo, ari, skipped)
    summary = {
        "command": "verify-seesaw", "d1": d1, "d2": d2, "p": p, "nmax": nmax, "character": character,
        "skipped": skipped, "geometric": _fracs(geo.coeffs), "arithmetic": _fracs(ari.coeffs), **res.as_dict(),
    }
    if report_dir:
        summary["report"] = write_report(report_dir, "seesaw", summary, {"geometric": geo, "arithmetic": ari},
                                         skipped, f"D1={d1}, D2={d2}, p={p}")
    if res.status == "vacuous":
        click.echo("warning: vacuous comparison, both series vanish on every compared index", err=True)
    _emit(summary)
    sys.exit(0 if res.passed else 1)


@main.command("verify-cusp")
@d1_opt
@d2_opt
@p_opt
@nmax_opt
@char_opt
@click.option("--basis", "basis_path", type=click.Path(dir_okay=False, exists=True), default=None,
              help="Basis file (defaults to the bundled weight-2 level-11 cusp form).")
@click.option("--series", "series_path", type=click.Path(dir_okay=False, exists=True), default=None,
              help="Series to test instead of the computed geometric series.")
@jobs_opt
@report_opt
def verify_cusp(d1, d2, p, nmax, character, basis_path, series_path, jobs, report_dir):
    """Membership of the geometric series in a cusp-form basis."""
    try:
        basis = BasisFile.load(basis_path) if basis_path else bundled_basis()
        if series_path:
            f, skipped = _load_one(series_path), []
        else:
            f, skipped = pipeline.geometric_series(d1, d2, p, nmax, character, jobs)
        m = membership(f, basis, skipped)
    except InsufficientPrecision as e:
        _fail_config(e)
    except InconsistentSeries as e:
        _emit({"command": "verify-cusp", "member": False, "error": str(e)})
        sys.exit(1)
    except ValueError as e:
        _fail_config(e)
    summary = {
        "command": "verify-cusp",
        "member": m.member,
        "coordinates": None if m.coordinates is None else _fracs(m.coordinates),
        "witness": m.witness,
        "certified": m.certified,
        "skipped": list(skipped),
        "series": _fracs(f.coeffs),
    }
    if report_dir:
        named = {"series": f}
        if m.member:
            comb = QSeries([0] * f.prec, f.prec, f.weight, f.level)
            for c, b in zip(m.coordinates, basis.series):
                comb = comb + b.truncate(f.prec).scale(c)
            named["basis combination"] = comb
        summary["report"] = write_report(report_dir, "cusp", summary, named, skipped, "cusp-space membership")
    _emit(summary)
    sys.exit(0 if m.member else 1)


@main.command("span-rank")
@click.argument("files", nargs=-1, type=click.Path(dir_okay=False, exists=True))
@click.option("--basis", "with_basis", is_flag=True, help="Include the bundled level-11 basis.")
def span_rank_cmd(files, with_basis):
    """Rank of the span of all q-series blocks in the given files."""
    series = []
    for path in files:
        series.extend(read_blocks(Path(path).read_text()))
    if with_basis:
        series.extend(bundled_basis().series)
    try:
        prec = min((s.prec for s in series), default=0)
        r = span_rank([s.truncate(prec) for s in series])
    except ValueError as e:
        _fail_config(e)
    _emit({"command": "span-rank", "count": len(series), "rank": r})


@main.command()
@seed_opt
@click.option("--count", type=int, default=50, show_default=True, help="Random pairs per property.")
def selftest(seed, count):
    """Randomized property checks of the intersection pairing (seeded, deterministic)."""
    from .suites import pairing_properties

    results = pairing_properties(random.Random(seed), count)
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)


if __name__ == "__main__":
    main()
