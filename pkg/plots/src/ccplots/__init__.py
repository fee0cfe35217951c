"""Offline figure rendering for simulation result CSVs.

Consumes the interchange format written by the ccmiso CLI and renders
mean rate-vs-SNR curves with standard-error bands, one line per
parameter group. Aggregation is plain averaging; nothing is smoothed
or recomputed.
"""

from .figure import CurveData, PlotSpec, aggregate, draw_figure, render
from .reader import COLUMNS, CSV_HEADER, EmptyInputError, SchemaError, read_rows

__all__ = [
    "COLUMNS",
    "CSV_HEADER",
    "CurveData",
    "EmptyInputError",
    "PlotSpec",
    "SchemaError",
    "aggregate",
    "draw_figure",
    "read_rows",
    "render",
]
