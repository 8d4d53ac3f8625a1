"""Hyperspectral unmixing toolkit: NMF/GNMF solvers, scene simulation, metrics."""

from ._core import (
    ConfigError,
    EvalReport,
    Factorization,
    LabelMap,
    NoiseStats,
    NumericalError,
    PcaSpectrum,
    SceneConfig,
    SimulatedScene,
    SpectralLibrary,
    WeightGraph,
    Weighting,
    __version__,
    aad,
    build_knn_graph,
    build_spatial_graph,
    estimate_endmember_count,
    evaluate,
    gaussian_kernel,
    load_label_map,
    load_matrix,
    load_spectral_library,
    match_endmembers,
    pca_spectrum,
    sad,
    save_matrix,
    simulate,
    solve,
)

__all__ = [
    "ConfigError",
    "EvalReport",
    "Factorization",
    "LabelMap",
    "NoiseStats",
    "NumericalError",
    "PcaSpectrum",
    "SceneConfig",
    "SimulatedScene",
    "SpectralLibrary",
    "WeightGraph",
    "Weighting",
    "__version__",
    "aad",
    "build_knn_graph",
    "build_spatial_graph",
    "estimate_endmember_count",
    "evaluate",
    "gaussian_kernel",
    "load_label_map",
    "load_matrix",
    "load_spectral_library",
    "match_endmembers",
    "pca_spectrum",
    "sad",
    "save_matrix",
    "simulate",
    "solve",
]
