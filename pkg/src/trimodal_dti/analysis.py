"""Post-training analysis: target ranking, cross-modal similarity reports,
and hyperparameter sweeps."""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .config import ModelConfig
from .errors import IntegrityError
from .harness import PreprocessedData, TrainReport, train
from .metrics import DatasetSplit
from .model import DrugTensors, ProteinTensors, TriModalNet

SIMILARITY_BIN_WIDTH = 0.05
CENTERED_BAND = 0.25

# sweep axis name -> ModelConfig field
SWEEP_PARAMETERS = {
    "dropout": "dropout",
    "learning_rate": "learning_rate",
    "gcn_layers": "gcn_layers",
    "attention_heads": "seq_heads",
}

DEFAULT_SWEEP_GRID = {
    "dropout": [0.1, 0.2, 0.3, 0.4, 0.5],
    "learning_rate": [1e-4, 5e-4, 1e-3, 5e-3],
    "gcn_layers": [1, 2, 3, 4],
    "attention_heads": [1, 2, 4, 8],
}


# ---------------------------------------------------------------------------
# target / drug ranking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankedTarget:
    rank: int
    target_id: str
    score: float

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must be a probability")


def _score_candidates(model: TriModalNet, anchor, candidates: list,
                      anchor_is_drug: bool, batch_size: int) -> np.ndarray:
    model.eval()
    scores = []
    with torch.no_grad():
        for start in range(0, len(candidates), batch_size):
            chunk = candidates[start:start + batch_size]
            index = list(range(len(chunk)))
            if anchor_is_drug:
                out = model([anchor], chunk, [0] * len(chunk), index)
            else:
                out = model(chunk, [anchor], index, [0] * len(chunk))
            scores.extend(out.probs.tolist())
    return np.asarray(scores)


def rank_candidates(model: TriModalNet, anchor_id: str, candidate_ids: list[str],
                    drug_tensors: dict[str, DrugTensors],
                    protein_tensors: dict[str, ProteinTensors],
                    k: int = 10, anchor_is_drug: bool = True,
                    batch_size: int = 32) -> list[RankedTarget]:
    """Score every (anchor, candidate) pair and return the top-k candidates.

    With ``anchor_is_drug`` the anchor is a drug and candidates are protein
    targets; otherwise the anchor is a protein and candidates are drugs.
    Ties are broken by candidate id ascending; k beyond the candidate count
    returns everything ranked.
    """
    anchor_pool = drug_tensors if anchor_is_drug else protein_tensors
    candidate_pool = protein_tensors if anchor_is_drug else drug_tensors
    if anchor_id not in anchor_pool:
        kind = "drug" if anchor_is_drug else "target"
        raise IntegrityError(f"unknown {kind} id {anchor_id!r}")
    for cid in candidate_ids:
        if cid not in candidate_pool:
            kind = "target" if anchor_is_drug else "drug"
            raise IntegrityError(f"unknown {kind} id {cid!r}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if not candidate_ids:
        raise ValueError("no candidates given")

    candidates = [candidate_pool[cid] for cid in candidate_ids]
    scores = _score_candidates(model, anchor_pool[anchor_id], candidates,
                               anchor_is_drug, batch_size)
    order = sorted(range(len(candidate_ids)),
                   key=lambda i: (-scores[i], candidate_ids[i]))
    return [RankedTarget(rank=r + 1, target_id=candidate_ids[i],
                         score=float(scores[i]))
            for r, i in enumerate(order[:k])]


def rank_targets(model, drug_id, target_ids, drug_tensors, protein_tensors,
                 k=10, batch_size=32):
    """Top-k protein targets for one drug (case-study table direction)."""
    return rank_candidates(model, drug_id, target_ids, drug_tensors,
                           protein_tensors, k, anchor_is_drug=True,
                           batch_size=batch_size)


def rank_drugs(model, target_id, drug_ids, drug_tensors, protein_tensors,
               k=10, batch_size=32):
    """Top-k drugs for one protein target (inverse direction)."""
    return rank_candidates(model, target_id, drug_ids, drug_tensors,
                           protein_tensors, k, anchor_is_drug=False,
                           batch_size=batch_size)


def write_ranked_csv(ranked: list[RankedTarget], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "target_id", "score"])
        for row in ranked:
            writer.writerow([row.rank, row.target_id, f"{row.score:.10f}"])
    return path


# ---------------------------------------------------------------------------
# cross-modal similarity
# ---------------------------------------------------------------------------

MODALITY_PAIR_NAMES = (
    ("drug", 1, 2), ("drug", 2, 3), ("drug", 1, 3),
    ("protein", 1, 2), ("protein", 2, 3), ("protein", 1, 3),
)


def _pair_key(kind: str, a: int, b: int) -> str:
    return f"{kind}_m{a}_m{b}"


@dataclass
class SimilarityReport:
    entity_ids: dict[str, list[str]]          # kind -> ordered ids
    similarities: dict[str, np.ndarray]       # pair key -> per-entity cosine
    histograms: dict[str, np.ndarray]         # pair key -> bin counts
    bin_edges: np.ndarray

    def fraction_centered(self, key: str | None = None) -> float:
        if key is not None:
            vals = self.similarities[key]
        else:
            vals = np.concatenate(list(self.similarities.values()))
        return float(np.mean(np.abs(vals) <= CENTERED_BAND))

    def summary(self) -> dict:
        pairs = {}
        for key, vals in self.similarities.items():
            pairs[key] = {
                "count": int(vals.size),
                "mean": float(vals.mean()),
                "std": float(vals.std()),
                "fraction_centered": self.fraction_centered(key),
            }
        return {
            "bin_width": SIMILARITY_BIN_WIDTH,
            "centered_band": CENTERED_BAND,
            "pairs": pairs,
            "overall_fraction_centered": self.fraction_centered(),
        }


def _rowwise_cosine(a: torch.Tensor, b: torch.Tensor) -> np.ndarray:
    a = a.detach().cpu().numpy().astype(np.float64)
    b = b.detach().cpu().numpy().astype(np.float64)
    num = (a * b).sum(axis=1)
    denom = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    if np.any(denom == 0):
        raise ValueError("zero-norm embedding in similarity computation")
    return num / denom


def modal_similarity(model: TriModalNet, data: PreprocessedData,
                     drug_tensors: dict[str, DrugTensors],
                     protein_tensors: dict[str, ProteinTensors],
                     batch_size: int = 32) -> SimilarityReport:
    """Per-entity cosine similarity between each pair of modality embeddings,
    histogrammed with 0.05-wide bins over [-1, 1]."""
    model.eval()
    drug_ids = sorted(drug_tensors)
    protein_ids = sorted(protein_tensors)
    modalities: dict[str, dict[int, np.ndarray]] = {}
    with torch.no_grad():
        for kind, ids, tensors, encode in (
                ("drug", drug_ids, drug_tensors, model.encode_drugs),
                ("protein", protein_ids, protein_tensors, model.encode_proteins)):
            chunks = {1: [], 2: [], 3: []}
            for start in range(0, len(ids), batch_size):
                batch = [tensors[i] for i in ids[start:start + batch_size]]
                encoded = encode(batch)
                for m in (1, 2, 3):
                    chunks[m].append(encoded[m])
            modalities[kind] = {m: torch.cat(chunks[m]) for m in (1, 2, 3)}

    edges = np.round(np.arange(-1.0, 1.0 + SIMILARITY_BIN_WIDTH / 2,
                               SIMILARITY_BIN_WIDTH), 10)
    similarities = {}
    histograms = {}
    for kind, a, b in MODALITY_PAIR_NAMES:
        vals = _rowwise_cosine(modalities[kind][a], modalities[kind][b])
        vals = np.clip(vals, -1.0, 1.0)
        key = _pair_key(kind, a, b)
        similarities[key] = vals
        histograms[key], _ = np.histogram(vals, bins=edges)
    return SimilarityReport(
        entity_ids={"drug": drug_ids, "protein": protein_ids},
        similarities=similarities, histograms=histograms, bin_edges=edges)


def write_similarity_report(report: SimilarityReport,
                            out_dir: str | Path) -> dict[str, Path]:
    """Write histogram CSV, raw similarity CSV, summary JSON, and a static
    histogram plot. Returns the path of each artifact."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    hist_path = out_dir / "modal_similarity_histograms.csv"
    with hist_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair", "bin_left", "bin_right", "count"])
        for key, counts in report.histograms.items():
            for i, count in enumerate(counts):
                writer.writerow([key, f"{report.bin_edges[i]:.2f}",
                                 f"{report.bin_edges[i + 1]:.2f}", int(count)])
    paths["histograms"] = hist_path

    sim_path = out_dir / "modal_similarity_values.csv"
    with sim_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair", "entity_id", "cosine"])
        for key, vals in report.similarities.items():
            kind = key.split("_")[0]
            for entity_id, value in zip(report.entity_ids[kind], vals):
                writer.writerow([key, entity_id, f"{value:.10f}"])
    paths["values"] = sim_path

    summary_path = out_dir / "modal_similarity_summary.json"
    summary_path.write_text(json.dumps(report.summary(), indent=1,
                                       sort_keys=True), encoding="utf-8")
    paths["summary"] = summary_path

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True)
    centers = (report.bin_edges[:-1] + report.bin_edges[1:]) / 2
    for ax, (kind, a, b) in zip(axes.flat, MODALITY_PAIR_NAMES):
        key = _pair_key(kind, a, b)
        ax.bar(centers, report.histograms[key], width=SIMILARITY_BIN_WIDTH,
               edgecolor="none")
        ax.axvspan(-CENTERED_BAND, CENTERED_BAND, alpha=0.15, color="gray")
        ax.set_title(key)
        ax.set_xlim(-1, 1)
    fig.supxlabel("cosine similarity")
    fig.supylabel("entities")
    fig.tight_layout()
    plot_path = out_dir / "modal_similarity.png"
    fig.savefig(plot_path, dpi=120)
    plt.close(fig)
    paths["plot"] = plot_path
    return paths


# ---------------------------------------------------------------------------
# hyperparameter sweep
# ---------------------------------------------------------------------------

def sweep(config: ModelConfig, grid: dict[str, list],
          data: PreprocessedData, split: DatasetSplit,
          verbose: bool = False) -> list[dict]:
    """Train one model per grid point under a fixed seed and split.

    Returns one row per point: the parameter values plus test metrics,
    suitable for metric-vs-parameter plotting.
    """
    if not grid:
        raise ValueError("empty parameter grid")
    unknown = set(grid) - set(SWEEP_PARAMETERS)
    if unknown:
        raise ValueError(f"unknown sweep parameters {sorted(unknown)}; "
                         f"expected a subset of {sorted(SWEEP_PARAMETERS)}")
    for name, values in grid.items():
        if not values:
            raise ValueError(f"empty value list for sweep parameter {name!r}")

    names = sorted(grid)
    rows = []
    for combo in itertools.product(*(grid[n] for n in names)):
        overrides = {SWEEP_PARAMETERS[n]: v for n, v in zip(names, combo)}
        run_config = ModelConfig.from_dict({**config.to_dict(), **overrides})
        report, _, _ = train(run_config, split, data, verbose=verbose)
        row = {n: v for n, v in zip(names, combo)}
        row.update(report.test)
        row["best_epoch"] = report.best_epoch
        rows.append(row)
    return rows


def write_sweep_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    if not rows:
        raise ValueError("no sweep rows to write")
    header = list(rows[0])
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[k] for k in header])
    return path
