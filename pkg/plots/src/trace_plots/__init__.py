"""Convergence-figure rendering for switching-subgradient trace CSVs."""

from .render import PlotSpec, TraceFormatError, load_trace, render

__version__ = "0.1.0"
