"""Partially adaptive sidelobe cancelers with randomized dimension reduction."""

from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    loss_distribution,
    omega_study,
    run_trial,
    single,
    sweep_k,
    sweep_r,
)
from .gsc import (
    FullFilter,
    ReducedWeights,
    assemble_full_filter,
    clairvoyant_filter,
    closed_form_filter,
    mn_filter,
    reduced_weights,
)
from .metrics import LossSample, interference_capture_angles, optimal_snr, snr_loss
from .reducers import (
    Method,
    Psi,
    ReducerSpec,
    SketchMatrix,
    clairvoyant_psi,
    make_column_select_sketch,
    make_gaussian_sketch,
    pc_psi,
    sketch_psi,
)
from .scenario import (
    CovarianceModel,
    RngStream,
    ScenarioSpec,
    SoIBasis,
    TrainingData,
    make_covariance_model,
    place_soi,
    sample_training,
    split_channels,
)

__version__ = "0.1.0"
