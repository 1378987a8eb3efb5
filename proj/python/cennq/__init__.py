"""CeNN simulation, power-of-two quantization and shift-based hardware models."""

from pathlib import Path

from ._core import (
    DataError,
    NumericalError,
    bit_width,
    cli,
    fixed_run,
    minimize,
    nn_distance,
    op_count,
    quant_values,
    quantize_value,
    run,
    schedule_cycles,
    synthesize,
)
from ._core import project as _project

_CALIBRATION = Path(__file__).with_name("fpga_calibration.json")


def project(calibration=None, table="all", model_baseline=False):
    """Stage-count and speedup rows for the calibrated comparison tables."""
    if calibration is None:
        calibration = _CALIBRATION
    return _project(str(calibration), table, model_baseline)


__all__ = [
    "DataError",
    "NumericalError",
    "bit_width",
    "cli",
    "fixed_run",
    "minimize",
    "nn_distance",
    "op_count",
    "project",
    "quant_values",
    "quantize_value",
    "run",
    "schedule_cycles",
    "synthesize",
]
