"""Configuration, sweep orchestration and the ``geotoc`` command line."""

from .config import RunConfig, SweepAxis, load_config, parse_angle
from .sweeps import run_fig1b, run_fig3, run_fig4, run_fig5
from .tables import ResultTable

__all__ = [
    "ResultTable",
    "RunConfig",
    "SweepAxis",
    "load_config",
    "parse_angle",
    "run_fig1b",
    "run_fig3",
    "run_fig4",
    "run_fig5",
]
