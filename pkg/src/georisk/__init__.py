"""Percentile-based exponential risk scores for geographic regions."""

from georisk.errors import GeoRiskError
from georisk.ingest import (
    Dataset,
    RegionRecord,
    fetch_public_data,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from georisk.optimize import (
    FitResult,
    GridResult,
    OlsResult,
    WeightVector,
    alternating_split,
    fit_ols,
    fit_subgradient,
    geo_score_errors,
    grid_search,
    max_abs_error,
    mean_abs_error,
    mix_scores,
    residual_subgradient,
)
from georisk.render import (
    ChoroplethSpec,
    RegionGeometry,
    join_geometries,
    load_geometries,
    render_svg,
    write_geojson,
)
from georisk.scoring import (
    ScoreConfig,
    ScoreTable,
    exp_mean_score,
    exp_score,
    geo_scores,
    outcome_scores,
    percentile_ranks,
    score_dataset,
)

__version__ = "0.1.0"
