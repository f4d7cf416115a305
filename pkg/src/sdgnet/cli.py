"""Command-line entry point.

Every verb reads the JSON config given by ``--config`` and applies flag
overrides on top. Exit codes: 0 ok, 1 validation error, 2 data error,
3 fit error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .exceptions import DataError, FitError, SdgnetError, ValidationError
from .features import write_features
from .ingest import write_drop_log, write_long_csv
from .model import FittedModel
from .network import write_nodes
from .pipeline import (
    PipelineConfig,
    build_features,
    fit_and_evaluate,
    load_panel,
    run_pipeline,
    selected,
)
from .report import country_report, distribution_export, heatmap_export, write_per_goal, write_report

logger = logging.getLogger("sdgnet")

VERBS = ("ingest", "network", "features", "fit", "evaluate", "classify", "report", "run")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--country", help="restrict per-country outputs to one country code")
    common.add_argument("--seed", type=int)
    common.add_argument("--strong-threshold", type=float)
    common.add_argument("--paper-model", action="store_true",
                        help="use the published coefficients instead of fitting")
    common.add_argument("--model", type=Path, help="model.json to reuse (evaluate/classify/report)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--panel", help="panel CSV path")
    common.add_argument("--scores", help="SDG Index scores CSV path")
    common.add_argument("--train-fraction", type=float)
    common.add_argument("--no-svg", action="store_true")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sdgnet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sub.add_parser(verb, parents=[common])
    return parser


def make_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    cfg = cfg.override(
        country=args.country, seed=args.seed, strong_threshold=args.strong_threshold,
        out_dir=args.out, panel_path=args.panel, scores_path=args.scores,
        train_fraction=args.train_fraction,
        model_source="paper" if args.paper_model else None,
        svg=False if args.no_svg else None,
    )
    return cfg.validate()


def _out(cfg) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_state(cfg, args):
    model = None
    if args.model is not None:
        with open(args.model) as fh:
            model = FittedModel.from_json(fh)
    return fit_and_evaluate(cfg, build_features(cfg), model)


def cmd_ingest(cfg, args):
    clean = load_panel(cfg)
    out = _out(cfg)
    with open(out / "drop_log.csv", "w", newline="") as fh:
        write_drop_log(clean.drop_log, fh)
    with open(out / "panel_clean.csv", "w", newline="") as fh:
        write_long_csv(clean.records(), fh)
    for c, p in clean.panels.items():
        print(f"{c}\tretained={p.retained_count}")
    for c in clean.unusable:
        print(f"{c}\tunusable")


def cmd_network(cfg, args):
    state = build_features(cfg)
    out = _out(cfg)
    for c in selected(cfg, state.networks):
        with open(out / f"nodes_{c}.csv", "w", newline="") as fh:
            write_nodes(state.networks[c], fh)
        heatmap_export(state.networks[c], out / f"heatmap_{c}.csv", svg=cfg.svg)


def cmd_features(cfg, args):
    state = build_features(cfg)
    out = _out(cfg)
    for c in selected(cfg, state.features):
        with open(out / f"features_{c}.csv", "w", newline="") as fh:
            write_features(state.features[c], fh)


def cmd_fit(cfg, args):
    state = fit_and_evaluate(cfg, build_features(cfg))
    with open(_out(cfg) / "model.json", "w") as fh:
        state.model.to_json(fh)
    m = state.model
    for name, b, se, (lo, hi), p in zip(("intercept", "x_d", "x_h"), m.beta, m.standard_errors,
                                        m.ci95, m.p_values):
        print(f"{name:10s} beta={b:9.4f} se={se:7.4f} ci=[{lo:.2f}, {hi:.2f}] p={p:.3g}")
    if m.vif:
        print("vif", " ".join(f"{v:.3f}" for v in m.vif))


def cmd_evaluate(cfg, args):
    state = _model_state(cfg, args)
    with open(_out(cfg) / "eval.json", "w") as fh:
        state.evaluation.to_json(fh)
    print(json.dumps(state.evaluation.to_dict()))


def _reports(cfg, args, charts: bool):
    state = _model_state(cfg, args)
    out = _out(cfg)
    for c in selected(cfg, state.features):
        rep = country_report(state.model.beta, state.features[c], cfg.probability_threshold)
        write_report(rep, out / f"report_{c}.csv")
        write_per_goal(rep, out / f"per_goal_{c}.csv")
        if charts:
            heatmap_export(state.networks[c], out / f"heatmap_{c}.csv", svg=cfg.svg)
            distribution_export(rep, out / f"bars_{c}.csv", out / f"pie_{c}.csv", svg=cfg.svg)
        syn, tro = rep.totals
        print(f"{c}\tsynergy={syn}\ttradeoff={tro}")


def cmd_classify(cfg, args):
    _reports(cfg, args, charts=False)


def cmd_report(cfg, args):
    _reports(cfg, args, charts=True)


def cmd_run(cfg, args):
    manifest = run_pipeline(cfg)
    print(f"wrote {len(manifest['files'])} files to {cfg.out_dir}")


COMMANDS = {v: globals()[f"cmd_{v}"] for v in VERBS}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        COMMANDS[args.verb](cfg, args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error [{getattr(exc, 'stage', args.verb)}]: {exc}", file=sys.stderr)
        return 2
    except FitError as exc:
        print(f"fit error [{getattr(exc, 'stage', args.verb)}]: {exc}", file=sys.stderr)
        return 3
    except SdgnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
