"""Two-branch quantized signal acquisition and sparse reconstruction."""

from .acquisition import (
    PEAK_TARGET,
    AcquisitionModel,
    peak_normalize,
    sdr,
    simulate_acquisition,
)
from .frames import TfFrame, analyze, hann_window, make_tight_frame, synthesize
from .quantizers import ConsistencySet, Quantizer, consistency_set, project, quantize
from .signals import (
    Downsampler,
    FirFilter,
    Signal,
    apply_filter,
    apply_filter_adjoint,
    design_lowpass,
    downsample,
    export_taps_csv,
    pad_to_multiple,
    upsample_adjoint,
)
from .solvers import (
    FeasibilityGap,
    SolverConfig,
    SolverRun,
    clip_complex,
    cpa_solve,
    cpa_solve_box,
    cva_solve,
    cva_solve_sets,
    default_steps,
)
from .experiment import ExperimentConfig, run_grid, synth_corpus, synth_sparse_signal
from .wavio import load_wav, save_wav

__version__ = "0.1.0"

__all__ = [
    "PEAK_TARGET",
    "AcquisitionModel",
    "ConsistencySet",
    "Downsampler",
    "ExperimentConfig",
    "FeasibilityGap",
    "FirFilter",
    "Quantizer",
    "Signal",
    "SolverConfig",
    "SolverRun",
    "TfFrame",
    "analyze",
    "apply_filter",
    "apply_filter_adjoint",
    "clip_complex",
    "consistency_set",
    "cpa_solve",
    "cpa_solve_box",
    "cva_solve",
    "cva_solve_sets",
    "default_steps",
    "design_lowpass",
    "downsample",
    "export_taps_csv",
    "hann_window",
    "load_wav",
    "make_tight_frame",
    "pad_to_multiple",
    "peak_normalize",
    "project",
    "quantize",
    "run_grid",
    "save_wav",
    "sdr",
    "simulate_acquisition",
    "synth_corpus",
    "synth_sparse_signal",
    "synthesize",
    "upsample_adjoint",
]
