"""Dataset preprocessing, training loop, checkpointing and ablation runs.

Training minimizes the weighted sum of the classification loss and the two
tri-modal contrastive losses, validates each epoch on held-out AUC, keeps
the best-validation checkpoint, and restores it for the test pass. All
randomness is seeded, so a rerun with the same config reproduces the
report exactly.
"""

from __future__ import annotations

import copy
import json
import pickle
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import ingest
from .config import ModelConfig
from .errors import DataError, IntegrityError, ParseError, TrainingDivergedError
from .fusion import LossWeights, bce_loss, total_loss
from .metrics import DatasetSplit, MetricError, Metrics, compute_metrics
from .model import (
    AblationVariant, TriModalNet, collate_pairs, prepare_drug_tensors,
    prepare_protein_tensors,
)
from .tokenizer import Vocabulary, train_vocab

ARCHIVE_VERSION = 1
CHECKPOINT_VERSION = 1


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

@dataclass
class PreprocessedData:
    samples: list[ingest.InteractionSample]
    drugs: dict[str, ingest.DrugRecord]
    proteins: dict[str, ingest.ProteinRecord]
    skipped: list[dict] = field(default_factory=list)

    @property
    def num_samples(self) -> int:
        return len(self.samples)


def _find_interaction_table(data_dir: Path) -> Path:
    for name in ("interactions.csv", "interactions.tsv"):
        candidate = data_dir / name
        if candidate.exists():
            return candidate
    raise ParseError(f"{data_dir}: no interactions.csv or interactions.tsv found")


def preprocess(data_dir: str | Path) -> PreprocessedData:
    """Parse a raw data tree into validated records.

    Entities with missing or unparseable auxiliary files (SDF conformer, PDB
    structure) are skipped and listed in the manifest, along with every
    interaction that references them. Integrity violations (conflicting
    rows, mismatched atom counts, bad pocket serials) abort.
    """
    data_dir = Path(data_dir)
    table = _find_interaction_table(data_dir)
    samples, drug_smiles, protein_seqs = ingest.read_entity_tables(table)

    skipped: list[dict] = []
    drugs: dict[str, ingest.DrugRecord] = {}
    for drug_id, smiles in sorted(drug_smiles.items()):
        sdf_path = data_dir / "sdf" / f"{drug_id}.sdf"
        try:
            record = ingest.DrugRecord(drug_id, smiles,
                                       ingest.smiles_to_2d_graph(smiles))
            if not sdf_path.exists():
                raise ParseError(f"missing conformer file {sdf_path.name}")
            ingest.attach_conformer(record, sdf_path.read_text(encoding="utf-8"))
        except (ParseError, ingest.chem.ChemistryError) as exc:
            skipped.append({"entity": drug_id, "kind": "drug", "reason": str(exc)})
            continue
        drugs[drug_id] = record

    proteins: dict[str, ingest.ProteinRecord] = {}
    for protein_id, sequence in sorted(protein_seqs.items()):
        pdb_path = data_dir / "pdb" / f"{protein_id}.pdb"
        pocket_path = data_dir / "pockets" / f"{protein_id}.json"
        try:
            if not pdb_path.exists():
                raise ParseError(f"missing structure file {pdb_path.name}")
            pdb_text = pdb_path.read_text(encoding="utf-8")
            record = ingest.ProteinRecord(protein_id, sequence)
            record.residue_graph = ingest.pdb_to_residue_graph(pdb_text)
            structure = ingest.parse_pdb(pdb_text)
            record.pockets = ingest.load_pockets(
                protein_id, pocket_path if pocket_path.exists() else None, structure)
        except ParseError as exc:
            skipped.append({"entity": protein_id, "kind": "protein", "reason": str(exc)})
            continue
        proteins[protein_id] = record

    kept_samples = []
    for s in samples:
        if s.drug_id in drugs and s.protein_id in proteins:
            kept_samples.append(s)
        else:
            skipped.append({"entity": f"{s.drug_id}/{s.protein_id}",
                            "kind": "interaction", "reason": "entity skipped"})
    if not kept_samples:
        raise IntegrityError("no usable interactions after preprocessing")
    return PreprocessedData(samples=kept_samples, drugs=drugs,
                            proteins=proteins, skipped=skipped)


def save_archive(data: PreprocessedData, path: str | Path) -> None:
    """Write the preprocessed dataset as a versioned binary archive plus a
    JSON skip manifest next to it."""
    path = Path(path)
    payload = {
        "version": ARCHIVE_VERSION,
        "samples": [(s.drug_id, s.protein_id, s.label) for s in data.samples],
        "drugs": data.drugs,
        "proteins": data.proteins,
        "skipped": data.skipped,
    }
    path.write_bytes(pickle.dumps(payload, protocol=4))
    manifest = path.with_suffix(path.suffix + ".manifest.json")
    manifest.write_text(json.dumps({"version": ARCHIVE_VERSION,
                                    "num_samples": data.num_samples,
                                    "num_drugs": len(data.drugs),
                                    "num_proteins": len(data.proteins),
                                    "skipped": data.skipped},
                                   indent=1, sort_keys=True), encoding="utf-8")


def load_archive(path: str | Path) -> PreprocessedData:
    payload = pickle.loads(Path(path).read_bytes())
    if payload.get("version") != ARCHIVE_VERSION:
        raise ParseError(f"{path}: unsupported archive version "
                         f"{payload.get('version')!r}")
    samples = [ingest.InteractionSample(d, p, l) for d, p, l in payload["samples"]]
    return PreprocessedData(samples=samples, drugs=payload["drugs"],
                            proteins=payload["proteins"],
                            skipped=payload["skipped"])


# ---------------------------------------------------------------------------
# vocabularies and tensor caches
# ---------------------------------------------------------------------------

def train_vocabularies(data: PreprocessedData, config: ModelConfig,
                       indices: list[int] | None = None
                       ) -> tuple[Vocabulary, Vocabulary]:
    """Train drug and protein vocabularies. When ``indices`` is given, only
    entities appearing in those samples contribute (no test leakage)."""
    samples = data.samples if indices is None else [data.samples[i] for i in indices]
    drug_ids = sorted({s.drug_id for s in samples})
    protein_ids = sorted({s.protein_id for s in samples})
    drug_corpus = [data.drugs[d].smiles for d in drug_ids]
    protein_corpus = [data.proteins[p].sequence for p in protein_ids]
    return (
        train_vocab(drug_corpus, config.drug_vocab_size, config.min_pair_freq),
        train_vocab(protein_corpus, config.protein_vocab_size, config.min_pair_freq),
    )


def build_entity_tensors(data: PreprocessedData, config: ModelConfig,
                         drug_vocab: Vocabulary, protein_vocab: Vocabulary):
    drug_tensors = {
        drug_id: prepare_drug_tensors(record, drug_vocab, config.drug_max_len)
        for drug_id, record in data.drugs.items()
    }
    protein_tensors = {
        protein_id: prepare_protein_tensors(record, protein_vocab,
                                            config.protein_max_len)
        for protein_id, record in data.proteins.items()
    }
    return drug_tensors, protein_tensors


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class TrainReport:
    variant: str
    seed: int
    history: list[dict]
    best_epoch: int            # -1 when no epoch improved or epochs == 0
    test: dict                 # auc / aupr / precision
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _score_indices(model: TriModalNet, data: PreprocessedData, indices,
                   drug_tensors, protein_tensors, batch_size: int,
                   variant: AblationVariant):
    model.eval()
    labels, scores = [], []
    with torch.no_grad():
        for start in range(0, len(indices), batch_size):
            chunk = [data.samples[i] for i in indices[start:start + batch_size]]
            drugs, proteins, di, pi, y = collate_pairs(chunk, drug_tensors,
                                                       protein_tensors)
            out = model(drugs, proteins, di, pi, variant)
            labels.extend(y.tolist())
            scores.extend(out.probs.tolist())
    return np.asarray(labels), np.asarray(scores)


def evaluate(model: TriModalNet, data: PreprocessedData, indices,
             drug_tensors, protein_tensors, batch_size: int = 32,
             variant: AblationVariant | None = None) -> Metrics:
    variant = variant or AblationVariant.from_name("all")
    labels, scores = _score_indices(model, data, indices, drug_tensors,
                                    protein_tensors, batch_size, variant)
    return compute_metrics(labels, scores)


def _ensure_finite(value: float, context: str) -> None:
    if not np.isfinite(value):
        raise TrainingDivergedError(
            f"non-finite loss ({value}) during {context}; "
            "reduce the learning rate or check the input data")


def train(config: ModelConfig, split: DatasetSplit, data: PreprocessedData,
          variant: str = "all",
          vocabularies: tuple[Vocabulary, Vocabulary] | None = None,
          on_model_built=None, restore_best: bool = True,
          verbose: bool = False):
    """Train one model on one split.

    Returns (report, model, (drug_vocab, protein_vocab)). Vocabularies are
    trained on the train split unless supplied. With ``restore_best`` the
    weights from the best-validation-AUC epoch are restored before the test
    pass; otherwise the final-epoch weights are kept.
    """
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    ablation = AblationVariant.from_name(variant)

    if vocabularies is None:
        vocabularies = train_vocabularies(data, config, split.train)
    drug_vocab, protein_vocab = vocabularies
    drug_tensors, protein_tensors = build_entity_tensors(
        data, config, drug_vocab, protein_vocab)

    model = TriModalNet(config, len(drug_vocab), len(protein_vocab))
    if on_model_built is not None:
        on_model_built(model)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate,
                                 weight_decay=config.weight_decay)
    weights = LossWeights(config.alpha, config.beta, config.gamma)

    history: list[dict] = []
    best_auc = -np.inf
    best_epoch = -1
    best_state = copy.deepcopy(model.state_dict())
    epochs_since_best = 0
    stopped_early = False

    train_idx = list(split.train)
    for epoch in range(config.epochs):
        model.train()
        perm = rng.permutation(len(train_idx))
        epoch_loss = 0.0
        batches = 0
        for start in range(0, len(train_idx), config.batch_size):
            chunk = [data.samples[train_idx[k]]
                     for k in perm[start:start + config.batch_size]]
            drugs, proteins, di, pi, y = collate_pairs(chunk, drug_tensors,
                                                       protein_tensors)
            out = model(drugs, proteins, di, pi, ablation)
            loss = total_loss(bce_loss(y, out.probs), out.contrastive_drug,
                              out.contrastive_protein, weights)
            loss_value = float(loss.detach())
            _ensure_finite(loss_value, f"epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss_value
            batches += 1

        val_metrics = evaluate(model, data, split.val, drug_tensors,
                               protein_tensors, config.batch_size, ablation)
        record = {"epoch": epoch, "train_loss": epoch_loss / max(batches, 1),
                  **{f"val_{k}": v for k, v in val_metrics.as_dict().items()}}
        history.append(record)
        if verbose:
            print(f"epoch {epoch}: loss {record['train_loss']:.4f} "
                  f"val_auc {record['val_auc']:.4f}")

        if val_metrics.auc > best_auc:
            best_auc = val_metrics.auc
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= config.patience:
                stopped_early = True
                break

    if restore_best:
        model.load_state_dict(best_state)
    test_metrics = evaluate(model, data, split.test, drug_tensors,
                            protein_tensors, config.batch_size, ablation)
    report = TrainReport(variant=variant, seed=config.seed, history=history,
                         best_epoch=best_epoch, test=test_metrics.as_dict(),
                         stopped_early=stopped_early)
    return report, model, (drug_vocab, protein_vocab)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path: str | Path, model: TriModalNet, config: ModelConfig,
                    drug_vocab: Vocabulary, protein_vocab: Vocabulary) -> None:
    torch.save({
        "version": CHECKPOINT_VERSION,
        "config": config.to_dict(),
        "state_dict": model.state_dict(),
        "drug_vocab": {"tokens": drug_vocab.token_to_id,
                       "merges": [list(m) for m in drug_vocab.merge_rules]},
        "protein_vocab": {"tokens": protein_vocab.token_to_id,
                          "merges": [list(m) for m in protein_vocab.merge_rules]},
        "torch_rng": torch.get_rng_state(),
    }, path)


def load_checkpoint(path: str | Path):
    """Returns (model in eval mode, config, drug_vocab, protein_vocab)."""
    payload = torch.load(path, weights_only=False)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ParseError(f"{path}: unsupported checkpoint version "
                         f"{payload.get('version')!r}")
    config = ModelConfig.from_dict(payload["config"])
    drug_vocab = Vocabulary(token_to_id=payload["drug_vocab"]["tokens"],
                            merge_rules=[tuple(m) for m in payload["drug_vocab"]["merges"]])
    protein_vocab = Vocabulary(token_to_id=payload["protein_vocab"]["tokens"],
                               merge_rules=[tuple(m) for m in payload["protein_vocab"]["merges"]])
    model = TriModalNet(config, len(drug_vocab), len(protein_vocab))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, config, drug_vocab, protein_vocab


# ---------------------------------------------------------------------------
# ablation and report aggregation
# ---------------------------------------------------------------------------

def run_ablation(config: ModelConfig, variants: list[str],
                 data: PreprocessedData, splits: list[DatasetSplit],
                 verbose: bool = False) -> dict[str, list[TrainReport]]:
    """Train every variant on every split with matched seeds. Returns
    variant -> list of reports (one per split)."""
    for v in variants:
        AblationVariant.from_name(v)  # validate before any training
    results: dict[str, list[TrainReport]] = {v: [] for v in variants}
    for v in variants:
        for split in splits:
            run_config = ModelConfig.from_dict({**config.to_dict(),
                                                "seed": split.seed})
            report, _, _ = train(run_config, split, data, variant=v,
                                 verbose=verbose)
            results[v].append(report)
    return results


def _mean_std(values: list[float]) -> tuple[float, float | None]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size >= 2:
        return float(arr.mean()), float(arr.std(ddof=1))
    return float(arr.mean()), None


def format_mean_std(mean: float, std: float | None) -> str:
    if std is None:
        return f"{mean:.3f}"
    return f"{mean:.3f} ± {std:.3f}"


def aggregate_reports(results: dict[str, list[TrainReport]],
                      dataset: str = "dataset") -> list[dict]:
    rows = []
    for variant, reports in results.items():
        row = {"dataset": dataset, "variant": variant,
               "runs": len(reports)}
        for metric in ("auc", "aupr", "precision"):
            mean, std = _mean_std([r.test[metric] for r in reports])
            row[f"{metric}_mean"] = mean
            row[f"{metric}_std"] = std
            row[metric] = format_mean_std(mean, std)
        rows.append(row)
    return rows


def format_report_table(rows: list[dict]) -> str:
    """Aligned-column text table: Dataset / Variant / AUC / AUPR / Precision."""
    headers = ("Dataset", "Variant", "AUC", "AUPR", "Precision")
    keys = ("dataset", "variant", "auc", "aupr", "precision")
    cells = [[str(row[k]) for k in keys] for row in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
              for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)))
    return "\n".join(lines)


def write_report(rows: list[dict], out_dir: str | Path, name: str) -> tuple[Path, Path]:
    """Write rows as JSON and as an aligned text table; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{name}.json"
    text_path = out_dir / f"{name}.txt"
    json_path.write_text(json.dumps(rows, indent=1, sort_keys=True),
                         encoding="utf-8")
    text_path.write_text(format_report_table(rows) + "\n", encoding="utf-8")
    return json_path, text_path
