"""Figures and delimited tables written next to verification reports."""

from __future__ import annotations

import csv
import io
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .qseries import QSeries  # noqa: E402

# fixed metadata keeps the PNG bytes stable between runs
_PNG_META = {"Software": None}


def series_rows(named: dict[str, QSeries], skipped: Sequence[int] = ()) -> list[dict]:
    prec = min(s.prec for s in named.values())
    rows = []
    for n in range(prec):
        row = {"n": n, "skipped": int(n in skipped)}
        for name, s in named.items():
            row[name] = str(s[n])
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def plot_series(named: dict[str, QSeries], path: str | Path, title: str = "", skipped: Sequence[int] = ()) -> Path:
    """Stem plot of the coefficients of each series, skipped indices greyed out."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    width = 0.8 / max(len(named), 1)
    for k, (name, s) in enumerate(named.items()):
        xs = [n + (k - (len(named) - 1) / 2) * width for n in range(s.prec) if n not in skipped]
        ys = [float(s[n]) for n in range(s.prec) if n not in skipped]
        ax.bar(xs, ys, width=width, label=name)
    for n in skipped:
        ax.axvspan(n - 0.45, n + 0.45, color="0.9", zorder=0)
    ax.axhline(0, color="black", linewidth=0.6)
    ax.set_xlabel("n")
    ax.set_ylabel("coefficient of q^n")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_META)
    plt.close(fig)
    return path


def write_report(directory: str | Path, stem: str, summary: dict, named: dict[str, QSeries],
                 skipped: Sequence[int] = (), title: str = "") -> dict[str, str]:
    """Write the report files for ``stem`` into ``directory`` and return their paths."""
    import json

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": d / f"{stem}.json",
        "csv": d / f"{stem}.csv",
        "png": d / f"{stem}.png",
    }
    paths["json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths["csv"].write_text(rows_to_csv(series_rows(named, skipped)))
    plot_series(named, paths["png"], title, skipped)
    return {k: str(v) for k, v in paths.items()}


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))
