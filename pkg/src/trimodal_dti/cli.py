"""Command-line interface.

Subcommands: preprocess, train-vocab, train, evaluate, ablate, sweep,
rank-targets, modal-similarity. Every command accepts --config (JSON file
mirroring the config field names), --seed (overrides the config seed), and
--out (output directory). Exit codes: 0 success, 2 usage error, 3
data-integrity error, 4 training failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, harness
from .config import ModelConfig
from .errors import DataError, TrainingDivergedError
from .metrics import MetricError, make_splits
from .model import ABLATION_VARIANTS
from .tokenizer import Vocabulary

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4


class UsageError(ValueError):
    pass


def _load_config(args) -> ModelConfig:
    if getattr(args, "config", None):
        config = ModelConfig.load(args.config)
    else:
        config = ModelConfig()
    if getattr(args, "seed", None) is not None:
        config = ModelConfig.from_dict({**config.to_dict(), "seed": args.seed})
    return config


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or "outputs")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_data(path: str) -> harness.PreprocessedData:
    return harness.load_archive(path)


def _splits(data, config, repeats: int):
    return make_splits(data.num_samples, "repeated_8_1_1",
                       seed=config.seed, repeats=repeats)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_preprocess(args) -> int:
    data = harness.preprocess(args.data_dir)
    out = _out_dir(args)
    archive = out / "dataset.bin"
    harness.save_archive(data, archive)
    print(f"preprocess: samples={data.num_samples} drugs={len(data.drugs)} "
          f"proteins={len(data.proteins)} skipped={len(data.skipped)} "
          f"archive={archive}")
    return EXIT_OK


def cmd_train_vocab(args) -> int:
    config = _load_config(args)
    data = _load_data(args.archive)
    drug_vocab, protein_vocab = harness.train_vocabularies(data, config)
    out = _out_dir(args)
    drug_path = out / "drug_vocab.json"
    protein_path = out / "protein_vocab.json"
    drug_vocab.save(drug_path)
    protein_vocab.save(protein_path)
    print(f"train-vocab: drug_tokens={len(drug_vocab)} "
          f"protein_tokens={len(protein_vocab)} out={out}")
    return EXIT_OK


def _maybe_load_vocabs(args):
    drug = getattr(args, "drug_vocab", None)
    protein = getattr(args, "protein_vocab", None)
    if (drug is None) != (protein is None):
        raise UsageError("--drug-vocab and --protein-vocab must be given together")
    if drug is None:
        return None
    return Vocabulary.load(drug), Vocabulary.load(protein)


def cmd_train(args) -> int:
    config = _load_config(args)
    data = _load_data(args.archive)
    split = _splits(data, config, repeats=1)[0]
    report, model, (drug_vocab, protein_vocab) = harness.train(
        config, split, data, variant=args.variant,
        vocabularies=_maybe_load_vocabs(args), verbose=args.verbose)
    out = _out_dir(args)
    harness.save_checkpoint(out / "checkpoint.pt", model, config,
                            drug_vocab, protein_vocab)
    (out / "train_report.json").write_text(
        json.dumps(report.to_dict(), indent=1, sort_keys=True),
        encoding="utf-8")
    print(f"train: variant={report.variant} best_epoch={report.best_epoch} "
          f"test_auc={report.test['auc']:.4f} test_aupr={report.test['aupr']:.4f} "
          f"test_precision={report.test['precision']:.4f} out={out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    data = _load_data(args.archive)
    model, config, drug_vocab, protein_vocab = harness.load_checkpoint(
        args.checkpoint)
    drug_tensors, protein_tensors = harness.build_entity_tensors(
        data, config, drug_vocab, protein_vocab)
    if args.split == "test":
        indices = _splits(data, config, repeats=1)[0].test
    else:
        indices = list(range(data.num_samples))
    metrics = harness.evaluate(model, data, indices, drug_tensors,
                               protein_tensors, config.batch_size)
    result = metrics.as_dict()
    if args.out:
        out = _out_dir(args)
        (out / "evaluation.json").write_text(
            json.dumps(result, indent=1, sort_keys=True), encoding="utf-8")
    print(f"evaluate: split={args.split} auc={result['auc']:.4f} "
          f"aupr={result['aupr']:.4f} precision={result['precision']:.4f}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    config = _load_config(args)
    data = _load_data(args.archive)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise UsageError("no ablation variants given")
    for v in variants:
        if v not in ABLATION_VARIANTS:
            raise UsageError(f"unknown ablation variant {v!r}; "
                             f"expected one of {ABLATION_VARIANTS}")
    splits = _splits(data, config, repeats=args.repeats)
    results = harness.run_ablation(config, variants, data, splits,
                                   verbose=args.verbose)
    rows = harness.aggregate_reports(results, dataset=args.dataset_name)
    out = _out_dir(args)
    json_path, text_path = harness.write_report(rows, out, "ablation")
    print(text_path.read_text(), end="")
    print(f"ablate: variants={len(variants)} runs_per_variant={args.repeats} "
          f"report={json_path}")
    return EXIT_OK


def _parse_grid(params: list[str]) -> dict[str, list]:
    grid: dict[str, list] = {}
    for spec in params:
        if "=" not in spec:
            raise UsageError(f"bad --param {spec!r}; expected name=v1,v2,...")
        name, _, values = spec.partition("=")
        name = name.strip()
        parsed = []
        for raw in values.split(","):
            raw = raw.strip()
            if not raw:
                continue
            if name in ("gcn_layers", "attention_heads"):
                parsed.append(int(raw))
            else:
                parsed.append(float(raw))
        grid[name] = parsed
    return grid


def cmd_sweep(args) -> int:
    config = _load_config(args)
    data = _load_data(args.archive)
    grid = _parse_grid(args.param) if args.param else dict(analysis.DEFAULT_SWEEP_GRID)
    unknown = set(grid) - set(analysis.SWEEP_PARAMETERS)
    if unknown or not grid or any(not v for v in grid.values()):
        raise UsageError(f"unknown sweep parameters {sorted(unknown)}; "
                         f"expected a non-empty subset of "
                         f"{sorted(analysis.SWEEP_PARAMETERS)}"
                         if unknown else "empty parameter grid")
    split = _splits(data, config, repeats=1)[0]
    rows = analysis.sweep(config, grid, data, split, verbose=args.verbose)
    out = _out_dir(args)
    csv_path = analysis.write_sweep_csv(rows, out / "sweep.csv")
    (out / "sweep.json").write_text(json.dumps(rows, indent=1, sort_keys=True),
                                    encoding="utf-8")
    best = max(rows, key=lambda r: r["auc"])
    print(f"sweep: points={len(rows)} best_auc={best['auc']:.4f} "
          f"csv={csv_path}")
    return EXIT_OK


def cmd_rank_targets(args) -> int:
    if (args.drug is None) == (args.target is None):
        raise UsageError("give exactly one of --drug or --target")
    data = _load_data(args.archive)
    model, config, drug_vocab, protein_vocab = harness.load_checkpoint(
        args.checkpoint)
    drug_tensors, protein_tensors = harness.build_entity_tensors(
        data, config, drug_vocab, protein_vocab)
    if args.candidates:
        candidate_ids = [c.strip() for c in args.candidates.split(",") if c.strip()]
    elif args.drug is not None:
        candidate_ids = sorted(protein_tensors)
    else:
        candidate_ids = sorted(drug_tensors)

    if args.drug is not None:
        ranked = analysis.rank_targets(model, args.drug, candidate_ids,
                                       drug_tensors, protein_tensors, k=args.k,
                                       batch_size=config.batch_size)
    else:
        ranked = analysis.rank_drugs(model, args.target, candidate_ids,
                                     drug_tensors, protein_tensors, k=args.k,
                                     batch_size=config.batch_size)
    print("rank,target_id,score")
    for row in ranked:
        print(f"{row.rank},{row.target_id},{row.score:.10f}")
    if args.out:
        out = _out_dir(args)
        analysis.write_ranked_csv(ranked, out / "ranked_targets.csv")
    return EXIT_OK


def cmd_modal_similarity(args) -> int:
    data = _load_data(args.archive)
    model, config, drug_vocab, protein_vocab = harness.load_checkpoint(
        args.checkpoint)
    drug_tensors, protein_tensors = harness.build_entity_tensors(
        data, config, drug_vocab, protein_vocab)
    report = analysis.modal_similarity(model, data, drug_tensors,
                                       protein_tensors, config.batch_size)
    out = _out_dir(args)
    paths = analysis.write_similarity_report(report, out)
    print(f"modal-similarity: entities_drug={len(report.entity_ids['drug'])} "
          f"entities_protein={len(report.entity_ids['protein'])} "
          f"fraction_centered={report.fraction_centered():.4f} "
          f"out={paths['summary'].parent}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    sub.add_argument("--out", help="output directory (default: outputs)")
    sub.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trimodal-dti",
        description="Tri-modal drug-target interaction prediction")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("preprocess", help="parse a raw data tree into an archive")
    p.add_argument("data_dir")
    _add_common(p)
    p.set_defaults(func=cmd_preprocess)

    p = commands.add_parser("train-vocab", help="train token vocabularies")
    p.add_argument("archive")
    _add_common(p)
    p.set_defaults(func=cmd_train_vocab)

    p = commands.add_parser("train", help="train a model on one split")
    p.add_argument("archive")
    p.add_argument("--variant", default="all", choices=ABLATION_VARIANTS)
    p.add_argument("--drug-vocab", help="pre-trained drug vocabulary JSON")
    p.add_argument("--protein-vocab", help="pre-trained protein vocabulary JSON")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("evaluate", help="score a checkpoint on a dataset")
    p.add_argument("archive")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", default="test", choices=("test", "all"))
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("ablate", help="train ablation variants")
    p.add_argument("archive")
    p.add_argument("--variants", default=",".join(ABLATION_VARIANTS))
    p.add_argument("--repeats", type=int, default=1,
                   help="independent splits per variant")
    p.add_argument("--dataset-name", default="dataset")
    _add_common(p)
    p.set_defaults(func=cmd_ablate)

    p = commands.add_parser("sweep", help="hyperparameter grid sweep")
    p.add_argument("archive")
    p.add_argument("--param", action="append", default=[],
                   metavar="NAME=V1,V2",
                   help="sweep axis, e.g. dropout=0.1,0.2 (repeatable; "
                          "default sweeps dropout, learning_rate, gcn_layers, "
                          "attention_heads)")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = commands.add_parser("rank-targets", help="rank candidates for one entity")
    p.add_argument("archive")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--drug", help="drug id: rank protein targets for it")
    p.add_argument("--target", help="protein id: rank drugs for it")
    p.add_argument("--candidates", help="comma-separated candidate ids "
                                        "(default: every entity in the archive)")
    p.add_argument("-k", type=int, default=10)
    _add_common(p)
    p.set_defaults(func=cmd_rank_targets)

    p = commands.add_parser("modal-similarity",
                            help="cross-modal cosine similarity report")
    p.add_argument("archive")
    p.add_argument("--checkpoint", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_modal_similarity)

    return parser


def _diagnostic(exc: Exception) -> str:
    message = " ".join(str(exc).split())
    return f"error: {type(exc).__name__}: {message}"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_USAGE
    except (DataError, MetricError, FileNotFoundError) as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_DATA
    except TrainingDivergedError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_TRAINING


if __name__ == "__main__":
    sys.exit(main())
