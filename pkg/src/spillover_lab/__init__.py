"""Sibling spillover effects in linear path models.

Build a five-variable sibling model (shared confounder, two exposures, two
outcomes), reason about its paths and implied moments, and estimate the
spillover coefficient from the gain-score regression — analytically, by
simulation, or from data.
"""
from __future__ import annotations

from .errors import (
    CollinearityError,
    ConfigError,
    CycleError,
    DataError,
    DegenerateExposureError,
    DimensionMismatchError,
    EmptyDataError,
    InsufficientDataError,
    NodeCapError,
    NumericError,
    ParseError,
    RankDeficiencyError,
    SchemaError,
    SimultaneityError,
    SingularityError,
    SpilloverLabError,
    UnknownVariableError,
    UsageError,
)
from .graph import (
    Edge,
    Path,
    PathModel,
    Variable,
    build_model,
    d_separated,
    descendants,
    enumerate_paths,
    load_model_json,
    model_to_spec,
    path_coefficient_product,
    path_label,
    topological_order,
)
from .identify import (
    BIASED,
    DIFFERENCE_IDENTIFIED,
    POINT_IDENTIFIED,
    BoundStatement,
    IdentificationVerdict,
    MediatedPathNote,
    bound_inference,
    classify_identification,
    mediated_component_note,
)
from .moments import (
    ImpliedMoments,
    PopulationRegression,
    SymbolicCheck,
    implied_covariance_matrix,
    implied_covariance_treks,
    partial_correlation,
    partial_covariance,
    population_partial_regression,
    symbolic_check,
)
from .presets import (
    EXTRA_DEFAULT,
    PRESETS,
    preset_model,
    preset_parameters,
    resolve_model,
)
from .regression import (
    Contrast,
    PairDataset,
    RegressionFit,
    SpilloverReport,
    fit_gain_score,
    gain_scores,
    linear_contrast,
    spillover_estimate,
)
from .simulate import (
    BINARY_MODE,
    LINEAR_MODE,
    SimulationConfig,
    SimulationSummary,
    config_from_model,
    figure4_table,
    model_seed,
    monte_carlo,
    preset_config,
    simulate_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BIASED",
    "BINARY_MODE",
    "BoundStatement",
    "CollinearityError",
    "ConfigError",
    "Contrast",
    "CycleError",
    "DIFFERENCE_IDENTIFIED",
    "DataError",
    "DegenerateExposureError",
    "DimensionMismatchError",
    "Edge",
    "EmptyDataError",
    "EXTRA_DEFAULT",
    "IdentificationVerdict",
    "ImpliedMoments",
    "InsufficientDataError",
    "LINEAR_MODE",
    "MediatedPathNote",
    "NodeCapError",
    "NumericError",
    "POINT_IDENTIFIED",
    "PRESETS",
    "PairDataset",
    "ParseError",
    "Path",
    "PathModel",
    "PopulationRegression",
    "RankDeficiencyError",
    "RegressionFit",
    "SchemaError",
    "SimulationConfig",
    "SimulationSummary",
    "SimultaneityError",
    "SingularityError",
    "SpilloverLabError",
    "SpilloverReport",
    "SymbolicCheck",
    "UnknownVariableError",
    "UsageError",
    "Variable",
    "bound_inference",
    "build_model",
    "classify_identification",
    "config_from_model",
    "d_separated",
    "descendants",
    "enumerate_paths",
    "figure4_table",
    "fit_gain_score",
    "gain_scores",
    "implied_covariance_matrix",
    "implied_covariance_treks",
    "linear_contrast",
    "load_model_json",
    "mediated_component_note",
    "model_seed",
    "model_to_spec",
    "monte_carlo",
    "partial_correlation",
    "partial_covariance",
    "path_coefficient_product",
    "path_label",
    "population_partial_regression",
    "preset_config",
    "preset_model",
    "preset_parameters",
    "resolve_model",
    "simulate_sample",
    "spillover_estimate",
    "symbolic_check",
    "topological_order",
    "__version__",
]
