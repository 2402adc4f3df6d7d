"""Offline plots for macrorts CSV outputs."""
from .curves import moving_average, plot_curves
from .evaltable import plot_eval_table
from .schema import EvalRow, SchemaError, Series, load_curves, load_eval
