"""Fisher-Rao distances between band-limited signals observed in Gaussian noise.

Signals are represented by their complex spectra on a discrete frequency
band and identified with the means of circular complex Gaussian observation
laws.  The package computes the information metric of parametric signal
charts, the connection symbols, closed-form geodesics and distances on the
full band manifold and on the known-magnitude submanifold, and verifies
every closed form against an independent numerical oracle.
"""

from .band import (
    ChartMismatchError,
    ConvergenceError,
    FrequencyGrid,
    NoiseProfile,
    Observation,
    SignalSpectrum,
    band_energy,
    band_from_json,
    band_to_json,
    build_grid,
    load_band_csv,
    log_likelihood,
    phase_rms_diff,
    sample_observation,
    save_band_csv,
    wrap_phase,
)
from .distances import (
    DistanceReport,
    distance_alpha,
    distance_full,
    distance_full_embedding,
    distance_full_known_mag,
    large_phase_limits,
    ratio_time_delay,
    report,
    small_phase_equivalent,
)
from .figures import FIGURE_CASES, ExperimentConfig, run_figure_case, sweep_points, write_figure_csv
from .geodesics import (
    AlphaGeodesic,
    AlphaPhaseChart,
    DegenerateGeodesicWarning,
    EmbeddingChart,
    GeodesicPath,
    LdgResidual,
    ModelChart,
    alpha_geodesic_coeff_path,
    embedding_coords,
    eval_alpha_geodesic,
    ldg_residual,
    path_length,
    sample_alpha_geodesic,
    save_path_csv,
    shoot_alpha_geodesic,
    solve_alpha_geodesic,
    spectrum_from_embedding,
    straight_line_geodesic,
)
from .metric import (
    ChristoffelTensor,
    FisherMatrix,
    christoffel,
    christoffel_fd,
    fisher_matrix,
    monte_carlo_fisher,
    path_speed,
)
from .models import FreeSpectrumModel, KnownMagnitudeModel, ParametricSignalModel, eval_model

__version__ = "0.1.0"

__all__ = [
    "AlphaGeodesic",
    "AlphaPhaseChart",
    "ChartMismatchError",
    "ChristoffelTensor",
    "ConvergenceError",
    "DegenerateGeodesicWarning",
    "DistanceReport",
    "EmbeddingChart",
    "ExperimentConfig",
    "FIGURE_CASES",
    "FisherMatrix",
    "FreeSpectrumModel",
    "FrequencyGrid",
    "GeodesicPath",
    "KnownMagnitudeModel",
    "LdgResidual",
    "ModelChart",
    "NoiseProfile",
    "Observation",
    "ParametricSignalModel",
    "SignalSpectrum",
    "alpha_geodesic_coeff_path",
    "band_energy",
    "band_from_json",
    "band_to_json",
    "build_grid",
    "christoffel",
    "christoffel_fd",
    "distance_alpha",
    "distance_full",
    "distance_full_embedding",
    "distance_full_known_mag",
    "embedding_coords",
    "eval_alpha_geodesic",
    "eval_model",
    "fisher_matrix",
    "large_phase_limits",
    "ldg_residual",
    "load_band_csv",
    "log_likelihood",
    "monte_carlo_fisher",
    "path_length",
    "path_speed",
    "phase_rms_diff",
    "ratio_time_delay",
    "report",
    "run_figure_case",
    "sample_alpha_geodesic",
    "sample_observation",
    "save_band_csv",
    "save_path_csv",
    "shoot_alpha_geodesic",
    "small_phase_equivalent",
    "solve_alpha_geodesic",
    "spectrum_from_embedding",
    "straight_line_geodesic",
    "sweep_points",
    "wrap_phase",
    "write_figure_csv",
]
