"""Signed correlation networks of SDG indicators and a logistic classifier
of synergy- vs trade-off-dominated indicators."""

from .exceptions import (
    CollinearityError,
    DataError,
    DegenerateDataError,
    DomainError,
    DuplicateKeyError,
    FitError,
    ParseError,
    SeparationError,
    ValidationError,
)
from .features import (
    NetworkFeatureExtractor,
    NodeFeatures,
    direct_effect,
    feature_table,
    harmonic_centrality,
)
from .ingest import (
    CountryPanel,
    IndicatorSeries,
    PerformanceCategory,
    RawRecord,
    categorize_country,
    clean_panel,
    normalize_wide,
    parse_long_csv,
)
from .model import (
    PAPER_BETA,
    EvalReport,
    FittedModel,
    SynergyClassifier,
    classify,
    evaluate,
    fit_logistic,
    paper_model,
    predict_probability,
    stratified_split,
    vif,
    wald_inference,
)
from .network import (
    IndicatorNetwork,
    StrongGraph,
    build_network,
    label,
    spearman,
    strengths,
    strong_subgraph,
)
from .pipeline import PipelineConfig, run_pipeline
from .report import CountryReport, country_report, distribution_export, heatmap_export

__version__ = "0.1.0"
