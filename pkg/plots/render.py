#!/usr/bin/env python3
"""Figures from metrics CSVs: decay curves, ratio traces, reference overlays.

Consumes the metrics CSV schema produced by the `leja measure` command
(header `N,d_l1,...,pair_energy`, one row per prefix) and nothing else;
this script never computes metrics itself.

Outputs are deterministic: fixed figure geometry, a pinned SVG hash salt,
and no embedded timestamps, so rerendering the same inputs reproduces the
same bytes.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "metrics-figures"
matplotlib.rcParams["svg.fonttype"] = "none"

import matplotlib.pyplot as plt  # noqa: E402


class PlotError(ValueError):
    """Bad spec or malformed input CSV."""


_SCALES = ("linear", "loglog", "semilogx")

# token -> (legend label, shape as a function of N); the constant c is
# fitted per curve in log space
_REFERENCES = {
    "one_over_N": ("/N", lambda n: 1.0 / n),
    "logN_over_N": (" log(N)/N", lambda n: math.log(n) / n),
    "log2N_over_N": (" log(N)^2/N", lambda n: math.log(n) ** 2 / n),
}

# small-N transients pollute the constant fit, so only rows from here up
# participate (all rows when none qualify)
_FIT_MIN_N = 64.0

_FIGSIZE = (6.4, 4.8)
_DPI = 110


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    x_column: str
    y_columns: tuple[str, ...]
    scale: str = "loglog"
    reference_curves: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.y_columns:
            raise PlotError("at least one y column is required")
        if self.scale not in _SCALES:
            raise PlotError(
                f"unknown scale {self.scale!r}; known: {', '.join(_SCALES)}"
            )
        for token in self.reference_curves:
            if token not in _REFERENCES:
                raise PlotError(
                    f"unknown reference curve {token!r}; known: "
                    + ", ".join(sorted(_REFERENCES))
                )


def read_columns(path: str, names: tuple[str, ...]) -> dict[str, list[float]]:
    """The named columns of a metrics CSV, as parallel float lists."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise PlotError(f"{path}: empty CSV")
        for name in names:
            if name not in header:
                raise PlotError(
                    f"{path}: no column {name!r} (header has: "
                    + ", ".join(header) + ")"
                )
        columns: dict[str, list[float]] = {name: [] for name in names}
        for lineno, row in enumerate(reader, start=2):
            for name in names:
                cell = row.get(name)
                if cell is None:
                    raise PlotError(f"{path}: line {lineno}: short record")
                try:
                    columns[name].append(float(cell))
                except ValueError as exc:
                    raise PlotError(
                        f"{path}: line {lineno}: bad {name} value {cell!r}"
                    ) from exc
    if not columns[names[0]]:
        raise PlotError(f"{path}: no data rows")
    return columns


def fit_constant(xs, ys, shape) -> float:
    """Least-squares c with y ~ c * shape(x), fitted in log space."""
    pairs = [(x, y) for x, y in zip(xs, ys)
             if y > 0.0 and x > 0.0 and shape(x) > 0.0]
    if not pairs:
        raise PlotError("reference fit needs positive data")
    tail = [(x, y) for x, y in pairs if x >= _FIT_MIN_N] or pairs
    logs = [math.log(y) - math.log(shape(x)) for x, y in tail]
    return math.exp(sum(logs) / len(logs))


def _apply_scale(ax, scale: str) -> None:
    if scale in ("loglog", "semilogx"):
        ax.set_xscale("log")
    if scale == "loglog":
        ax.set_yscale("log")


def _plot_spec(ax, spec: PlotSpec, label_prefix: str = "") -> None:
    data = read_columns(spec.input_csv, (spec.x_column,) + spec.y_columns)
    xs = data[spec.x_column]
    for name in spec.y_columns:
        ax.plot(xs, data[name], marker=".", label=label_prefix + name)
    for token in spec.reference_curves:
        suffix, shape = _REFERENCES[token]
        for name in spec.y_columns:
            c = fit_constant(xs, data[name], shape)
            ax.plot(xs, [c * shape(x) for x in xs], linestyle="--",
                    label=f"{c:.3g}{suffix}")


def _save(fig, out_path: str) -> list[str]:
    root, ext = os.path.splitext(out_path)
    if ext.lower() not in (".svg", ".png"):
        raise PlotError(f"output must end in .svg or .png: {out_path}")
    svg, png = root + ".svg", root + ".png"
    fig.savefig(svg, format="svg", metadata={"Date": None})
    fig.savefig(png, format="png", dpi=_DPI)
    plt.close(fig)
    return [svg, png]


def _new_axes(spec: PlotSpec):
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    _apply_scale(ax, spec.scale)
    ax.set_xlabel(spec.x_column)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def render(spec: PlotSpec, out_path: str) -> list[str]:
    """One figure from one CSV; returns the written paths (SVG and PNG)."""
    fig, ax = _new_axes(spec)
    _plot_spec(ax, spec)
    ax.legend()
    return _save(fig, out_path)


def render_comparison(specs: list[PlotSpec], out_path: str) -> list[str]:
    """Curves from two or more CSVs overlaid on a shared x column."""
    if len(specs) < 2:
        raise PlotError("comparison needs at least 2 specs (use render)")
    x_names = {spec.x_column for spec in specs}
    if len(x_names) != 1:
        raise PlotError(
            "specs disagree on the x column: " + ", ".join(sorted(x_names))
        )
    fig, ax = _new_axes(specs[0])
    for spec in specs:
        stem = os.path.splitext(os.path.basename(spec.input_csv))[0]
        _plot_spec(ax, spec, label_prefix=stem + " ")
    ax.legend()
    return _save(fig, out_path)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Render metrics CSVs to SVG and PNG figures."
    )
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="metrics CSV; repeat to overlay several files")
    parser.add_argument("--x", default="N", help="x column name")
    parser.add_argument("--y", dest="ys", action="append", required=True,
                        help="y column name; repeatable")
    parser.add_argument("--scale", choices=_SCALES, default="loglog")
    parser.add_argument("--ref", dest="refs", action="append", default=[],
                        help="reference overlay; repeatable; one of: "
                        + ", ".join(sorted(_REFERENCES)))
    parser.add_argument("--out", required=True, help=".svg or .png path")
    args = parser.parse_args(argv)
    try:
        specs = [
            PlotSpec(
                input_csv=path,
                x_column=args.x,
                y_columns=tuple(args.ys),
                scale=args.scale,
                reference_curves=tuple(args.refs),
            )
            for path in args.inputs
        ]
        if len(specs) == 1:
            written = render(specs[0], args.out)
        else:
            written = render_comparison(specs, args.out)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
