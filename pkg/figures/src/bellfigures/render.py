"""Render the six standard bellsim figures from sweep CSVs.

figure ids and the CLI command whose CSV they expect:
  fig1   correlate     sharp-pair correlation curve
  fig2   passive-test  sharp-pair coincidence rate
  fig3   correlate     realistic correlation curve (quantum overlay)
  fig4   passive-test  realistic coincidence rate
  fig6   active-test   controlled-source coincidence rate
  malus  malus-check   two-polarizer transmission check

The overlay reference is cos(2*setting) for the correlation figures and
cos^2(setting) for the Malus check; the rate figures have no reference
curve and ignore the flag.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SchemaError, read_sweep_csv

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig6", "malus")

_EXPECTED_COMMAND = {
    "fig1": "correlate",
    "fig2": "passive-test",
    "fig3": "correlate",
    "fig4": "passive-test",
    "fig6": "active-test",
    "malus": "malus-check",
}

_STYLE = {
    "fig1": dict(
        title="Correlation, aligned pairs",
        xlabel="analyzer angle difference (rad)",
        ylabel="correlation E",
        reference="cos2",
    ),
    "fig2": dict(
        title="Coincidence rate, aligned pairs",
        xlabel="analyzer angle difference (rad)",
        ylabel="detected-pair fraction",
        reference=None,
    ),
    "fig3": dict(
        title="Correlation, misaligned pairs",
        xlabel="analyzer angle difference (rad)",
        ylabel="correlation E",
        reference="cos2",
    ),
    "fig4": dict(
        title="Coincidence rate, misaligned pairs",
        xlabel="analyzer angle difference (rad)",
        ylabel="detected-pair fraction",
        reference=None,
    ),
    "fig6": dict(
        title="Coincidence rate, controlled source",
        xlabel="common analyzer angle (rad)",
        ylabel="detected-pair fraction",
        reference=None,
    ),
    "malus": dict(
        title="Two-polarizer transmission",
        xlabel="second polarizer offset (rad)",
        ylabel="+1 fraction among detected",
        reference="cos2sq",
    ),
}

_REFERENCE_CURVES = {
    "cos2": (lambda x: np.cos(2.0 * x), "cos 2x"),
    "cos2sq": (lambda x: np.cos(x) ** 2, "cos^2 x"),
}


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    input_csvs: list
    output_image: Path
    overlay_reference: bool = True

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}")
        if not self.input_csvs:
            raise ValueError("at least one input CSV is required")


def _check_kind(spec, data):
    command = data.manifest.get("command")
    expected = _EXPECTED_COMMAND[spec.figure_id]
    if command is not None and command != expected:
        raise SchemaError(
            f"{data.path}: {spec.figure_id} expects a {expected!r} series, "
            f"manifest says {command!r}"
        )


def build_figure(spec):
    """Assemble the matplotlib Figure for ``spec`` without saving it."""
    style = _STYLE[spec.figure_id]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for csv_path in spec.input_csvs:
        data = read_sweep_csv(csv_path)
        _check_kind(spec, data)
        ax.errorbar(
            data.settings,
            data.values,
            yerr=data.stderrs,
            fmt="o",
            markersize=3.5,
            capsize=2,
            label=Path(csv_path).stem,
        )
    if spec.overlay_reference and style["reference"] is not None:
        curve, label = _REFERENCE_CURVES[style["reference"]]
        lo = min(read_sweep_csv(p).settings.min() for p in spec.input_csvs)
        hi = max(read_sweep_csv(p).settings.max() for p in spec.input_csvs)
        xs = np.linspace(lo, hi, 400)
        ax.plot(xs, curve(xs), "-", color="black", linewidth=1.2, label=label)
    ax.set_title(style["title"])
    ax.set_xlabel(style["xlabel"])
    ax.set_ylabel(style["ylabel"])
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return fig


def render(spec):
    """Render ``spec`` to its output image and return the path."""
    fig = build_figure(spec)
    out = Path(spec.output_image)
    try:
        fig.savefig(out, dpi=150)
    finally:
        plt.close(fig)
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="Render a bellsim figure from sweep CSV files.",
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("csvs", nargs="+", metavar="csv")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    parser.add_argument(
        "--no-reference",
        action="store_true",
        help="skip the analytic overlay curve",
    )
    args = parser.parse_args(argv)
    spec = FigureSpec(
        figure_id=args.figure_id,
        input_csvs=list(args.csvs),
        output_image=Path(args.out),
        overlay_reference=not args.no_reference,
    )
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"render_figures: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"render_figures: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
