"""Static plots from simulator artifacts.

This package reads the simulator's emitted files (trace.csv and
summary.json) and renders the two figure styles used to inspect runs:
per-app heart-rate panels with target bands, and grouped per-policy
energy bars. It deliberately never imports the simulator package; the
documented file formats are the only coupling.
"""

from .io import SchemaError, load_summary, load_trace
from .plots import plot_energy, plot_hr

__all__ = ["SchemaError", "load_summary", "load_trace", "plot_energy", "plot_hr"]
