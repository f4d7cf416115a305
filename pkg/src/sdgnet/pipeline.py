"""End-to-end driver: panel CSV in, per-country artifacts and a manifest out."""
from __future__ import annotations

import contextlib
import hashlib
import json
import logging
import shutil
import tempfile
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .exceptions import DataError, ValidationError
from .features import NodeFeatures, design_matrix, feature_table, write_features
from .ingest import (
    CleanResult,
    categorize_country,
    clean_panel,
    normalize_wide,
    parse_long_csv,
    read_index_scores,
    write_drop_log,
)
from .model import FittedModel, evaluate, fit_logistic, paper_model, stratified_split
from .network import IndicatorNetwork, build_network, write_nodes
from .report import (
    country_report,
    distribution_export,
    heatmap_export,
    write_per_goal,
    write_report,
)

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    panel_path: str | None = None
    panel_format: str = "long"  # "long" | "wide"
    scores_path: str | None = None
    year_start: int = 2000
    year_end: int = 2024
    strong_threshold: float = 0.8
    train_fraction: float = 0.8
    seed: int = 42
    probability_threshold: float = 0.5
    category_cutoffs: tuple[float, float] = (50.0, 80.0)
    model_source: str = "fit"  # "fit" | "paper"
    out_dir: str = "out"
    country: str | None = None
    svg: bool = True

    @property
    def window(self) -> tuple[int, int]:
        return (self.year_start, self.year_end)

    def validate(self) -> "PipelineConfig":
        if self.panel_path is None:
            raise ValidationError("panel_path is required")
        if self.panel_format not in ("long", "wide"):
            raise ValidationError(f"panel_format must be 'long' or 'wide', got {self.panel_format!r}")
        if self.year_start > self.year_end:
            raise ValidationError("year_start after year_end")
        if not 0.0 < self.strong_threshold <= 1.0:
            raise ValidationError(f"strong_threshold {self.strong_threshold} outside (0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(f"train_fraction {self.train_fraction} outside (0, 1): no test stratum")
        if not 0.0 < self.probability_threshold < 1.0:
            raise ValidationError(f"probability_threshold {self.probability_threshold} outside (0, 1)")
        lo, hi = self.category_cutoffs
        if not 0.0 <= lo < hi <= 100.0:
            raise ValidationError(f"category_cutoffs {self.category_cutoffs} must increase within [0, 100]")
        if self.model_source not in ("fit", "paper"):
            raise ValidationError(f"model_source must be 'fit' or 'paper', got {self.model_source!r}")
        if self.model_source == "fit" and self.scores_path is None:
            raise ValidationError("model_source 'fit' needs scores_path for the stratified split")
        return self

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path | None = None) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "category_cutoffs" in data:
            data["category_cutoffs"] = tuple(data["category_cutoffs"])
        if base_dir is not None:
            for key in ("panel_path", "scores_path", "out_dir"):
                if data.get(key) is not None and not Path(data[key]).is_absolute():
                    data[key] = str(base_dir / data[key])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data, base_dir=path.parent)

    def override(self, **kw) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except Exception as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def load_panel(cfg: PipelineConfig) -> CleanResult:
    try:
        data = Path(cfg.panel_path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read panel {cfg.panel_path}: {exc}") from None
    if cfg.panel_format == "wide":
        records = normalize_wide(data, cfg.window).records
    else:
        records = parse_long_csv(data)
    return clean_panel(records, cfg.window)


def load_categories(cfg: PipelineConfig, countries) -> dict:
    if cfg.scores_path is None:
        return {}
    try:
        scores = read_index_scores(Path(cfg.scores_path).read_bytes())
    except OSError as exc:
        raise DataError(f"cannot read scores {cfg.scores_path}: {exc}") from None
    cats = {}
    for c in countries:
        if c in scores:
            cats[c] = categorize_country(scores[c], cfg.category_cutoffs)
        else:
            logger.warning("%s has no SDG Index score; left out of the pooled split", c)
    return cats


@dataclass
class PipelineState:
    clean: CleanResult
    networks: dict[str, IndicatorNetwork]
    features: dict[str, list[NodeFeatures]]
    model: FittedModel | None = None
    evaluation: Any = None
    split: Any = None
    categories: dict = field(default_factory=dict)


def selected(cfg: PipelineConfig, countries) -> list[str]:
    if cfg.country is None:
        return list(countries)
    if cfg.country not in countries:
        raise DataError(f"country {cfg.country!r} not present or unusable after cleaning")
    return [cfg.country]


def build_features(cfg: PipelineConfig) -> PipelineState:
    with stage("ingest"):
        clean = load_panel(cfg)
    with stage("network"):
        networks = {c: build_network(p) for c, p in clean.panels.items()}
    with stage("features"):
        feats = {c: feature_table(n, cfg.strong_threshold) for c, n in networks.items()}
    return PipelineState(clean, networks, feats)


def fit_and_evaluate(cfg: PipelineConfig, state: PipelineState,
                     model: FittedModel | None = None) -> PipelineState:
    """Pool all usable countries, split per performance category, fit, score.

    A ``model`` passed in is scored as is instead of being refitted.
    """
    with stage("split"):
        cats = load_categories(cfg, state.features)
        pooled = [(c, f) for c in state.features if c in cats for f in state.features[c]]
        split = None
        if cats:
            keys = [(c, f.indicator_id) for c, f in pooled]
            split = stratified_split(
                [(k, k[0]) for k in keys], cats, cfg.train_fraction, cfg.seed
            )
    with stage("fit"):
        if model is not None:
            pass
        elif cfg.model_source == "paper":
            model = paper_model()
        else:
            if not pooled:
                raise DataError("no scored country available for fitting")
            train = [f for c, f in pooled if split.assignment[(c, f.indicator_id)] == "train"]
            X, y = design_matrix(train)
            model = fit_logistic(X, y)
            model.seed = cfg.seed
            model.train_fraction = cfg.train_fraction
    with stage("evaluate"):
        if split is not None:
            test = [f for c, f in pooled if split.assignment[(c, f.indicator_id)] == "test"]
        else:
            test = [f for rows in state.features.values() for f in rows]
        X, y = design_matrix(test)
        report = evaluate(model, X, y, cfg.probability_threshold) if len(test) else None
    state.model, state.evaluation, state.split, state.categories = model, report, split, cats
    return state


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, files: list[Path]) -> dict:
    entries = sorted(
        ({"path": p.relative_to(out_dir).as_posix(), "sha256": sha256(p)} for p in files),
        key=lambda e: e["path"],
    )
    manifest = {"files": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run every stage and write all outputs into ``cfg.out_dir``.

    Files are staged in a scratch directory and only moved into place once
    every stage succeeded, so a failure leaves no partial outputs. Returns
    the manifest (path + SHA-256 of each file).
    """
    cfg.validate()
    state = build_features(cfg)
    countries = selected(cfg, state.features)
    state = fit_and_evaluate(cfg, state)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".staging-") as tmp:
        tmp = Path(tmp)
        with stage("report"):
            written = write_outputs(cfg, state, countries, tmp)
            manifest = write_manifest(tmp, written)
        for p in written + [tmp / "manifest.json"]:
            shutil.move(str(p), out_dir / p.relative_to(tmp))
    return manifest


def write_outputs(cfg: PipelineConfig, state: PipelineState, countries, out: Path) -> list[Path]:
    written: list[Path] = []
    with open(out / "drop_log.csv", "w", newline="") as fh:
        write_drop_log(state.clean.drop_log, fh)
    written.append(out / "drop_log.csv")

    with open(out / "model.json", "w") as fh:
        state.model.to_json(fh)
    written.append(out / "model.json")
    if state.evaluation is not None:
        with open(out / "eval.json", "w") as fh:
            state.evaluation.to_json(fh)
        written.append(out / "eval.json")

    for c in countries:
        net = state.networks[c]
        with open(out / f"nodes_{c}.csv", "w", newline="") as fh:
            write_nodes(net, fh)
        written.append(out / f"nodes_{c}.csv")

        with open(out / f"features_{c}.csv", "w", newline="") as fh:
            write_features(state.features[c], fh)
        written.append(out / f"features_{c}.csv")

        rep = country_report(state.model.beta, state.features[c], cfg.probability_threshold)
        write_report(rep, out / f"report_{c}.csv")
        write_per_goal(rep, out / f"per_goal_{c}.csv")
        written += [out / f"report_{c}.csv", out / f"per_goal_{c}.csv"]
        written += heatmap_export(net, out / f"heatmap_{c}.csv", svg=cfg.svg)
        written += distribution_export(rep, out / f"bars_{c}.csv", out / f"pie_{c}.csv", svg=cfg.svg)
    return written
