"""Cycle-accurate pipelined NTT simulator.

The compiled core (``_core``) is used for :func:`run` when it was built and
the digit size fits a machine word; otherwise, or when the environment
variable ``DSNTT_PURE_PYTHON`` is set, the pure-Python engine runs.
:func:`step` always uses the Python engine so every cycle is observable.
"""

import os

from dsntt.pipeline.config import CycleReport, Pipeline, PipelineConfig, build_pipeline, cycle_model
from dsntt.pipeline.runner import load, run, step
from dsntt.pipeline.sim import PySim

try:
    if os.environ.get("DSNTT_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from dsntt.pipeline._core import CoreSim
except ImportError:
    CoreSim = None

HAVE_COMPILED = CoreSim is not None

__all__ = [
    "CycleReport",
    "Pipeline",
    "PipelineConfig",
    "PySim",
    "CoreSim",
    "HAVE_COMPILED",
    "build_pipeline",
    "cycle_model",
    "load",
    "run",
    "step",
]
