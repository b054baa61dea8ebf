"""Standalone plotting package for bellsim CSV outputs."""

__version__ = "0.1.0"

from .csvio import SchemaError, SweepData, read_manifest, read_sweep_csv
from .render import FIGURE_IDS, FigureSpec, build_figure, main, render
