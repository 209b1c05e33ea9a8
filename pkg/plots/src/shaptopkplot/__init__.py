"""Curve plots with standard-error bands for shaptopk benchmark CSVs."""

from .curves import Curve, CurveSpec, EmptySelection, SchemaError, compute_curves, load_rows
from .render import render

__version__ = "0.1.0"
