"""Command-line interface: exit codes, artifacts, and diagnostics."""

import csv
import json

import pytest

from trimodal_dti import cli, harness, synthetic
from trimodal_dti.errors import TrainingDivergedError

from test_model import tiny_config


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One preprocessed + trained workspace shared by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    raw = root / "raw"
    synthetic.write_dataset(raw, num_drugs=10, num_proteins=6,
                            num_pairs=40, seed=0)

    config_path = root / "config.json"
    tiny_config(epochs=1).save(config_path)

    out = root / "out"
    assert cli.main(["preprocess", str(raw), "--out", str(out)]) == 0
    archive = out / "dataset.bin"
    assert cli.main(["train", str(archive), "--config", str(config_path),
                     "--out", str(out)]) == 0
    return {"root": root, "raw": raw, "archive": archive,
            "config": config_path, "out": out,
            "checkpoint": out / "checkpoint.pt"}


# ---------------------------------------------------------------------------
# preprocess
# ---------------------------------------------------------------------------

def test_preprocess_writes_archive_and_manifest(workspace, capsys):
    archive = workspace["archive"]
    assert archive.exists()
    assert archive.with_suffix(".bin.manifest.json").exists()
    data = harness.load_archive(archive)
    assert data.num_samples == 40


def test_preprocess_missing_directory_is_data_error(tmp_path, capsys):
    code = cli.main(["preprocess", str(tmp_path / "nowhere"),
                     "--out", str(tmp_path)])
    assert code == 3
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "\n" not in err.strip()


def test_preprocess_summary_line(tmp_path, capsys):
    raw = tmp_path / "raw"
    synthetic.write_dataset(raw, num_drugs=5, num_proteins=3,
                            num_pairs=12, seed=2)
    assert cli.main(["preprocess", str(raw), "--out", str(tmp_path / "o")]) == 0
    line = capsys.readouterr().out.strip()
    assert "samples=12" in line and "drugs=5" in line and "proteins=3" in line


# ---------------------------------------------------------------------------
# vocabularies and training
# ---------------------------------------------------------------------------

def test_train_vocab_writes_both_files(workspace, tmp_path):
    out = tmp_path / "vocab"
    code = cli.main(["train-vocab", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--out", str(out)])
    assert code == 0
    from trimodal_dti.tokenizer import Vocabulary
    dv = Vocabulary.load(out / "drug_vocab.json")
    pv = Vocabulary.load(out / "protein_vocab.json")
    assert len(dv) > 2 and len(pv) > 2


def test_train_writes_checkpoint_and_report(workspace):
    assert workspace["checkpoint"].exists()
    report = json.loads((workspace["out"] / "train_report.json").read_text())
    assert report["variant"] == "all"
    assert {"auc", "aupr", "precision"} <= set(report["test"])


def test_train_with_pretrained_vocab(workspace, tmp_path):
    vocab_dir = tmp_path / "v"
    assert cli.main(["train-vocab", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--out", str(vocab_dir)]) == 0
    out = tmp_path / "t"
    code = cli.main(["train", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--drug-vocab", str(vocab_dir / "drug_vocab.json"),
                     "--protein-vocab", str(vocab_dir / "protein_vocab.json"),
                     "--out", str(out)])
    assert code == 0
    assert (out / "checkpoint.pt").exists()


def test_train_vocab_flags_must_pair_up(workspace, tmp_path, capsys):
    code = cli.main(["train", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--drug-vocab", "only_one.json",
                     "--out", str(tmp_path)])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_train_bad_config_is_data_error(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"no_such_field": 1}')
    code = cli.main(["train", str(workspace["archive"]),
                     "--config", str(bad), "--out", str(tmp_path)])
    assert code == 3
    assert "no_such_field" in capsys.readouterr().err


def test_train_divergence_maps_to_exit_4(workspace, tmp_path, capsys,
                                         monkeypatch):
    def explode(*args, **kwargs):
        raise TrainingDivergedError("non-finite loss (nan) during epoch 0")

    monkeypatch.setattr(cli.harness, "train", explode)
    code = cli.main(["train", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--out", str(tmp_path)])
    assert code == 4
    err = capsys.readouterr().err.strip()
    assert err == "error: TrainingDivergedError: non-finite loss (nan) during epoch 0"


def test_missing_archive_is_data_error(tmp_path, capsys):
    code = cli.main(["train", str(tmp_path / "none.bin"),
                     "--out", str(tmp_path)])
    assert code == 3


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_prints_metrics(workspace, capsys):
    code = cli.main(["evaluate", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"])])
    assert code == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("evaluate: split=test auc=")


def test_evaluate_all_split_writes_json(workspace, tmp_path, capsys):
    out = tmp_path / "eval"
    code = cli.main(["evaluate", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--split", "all", "--out", str(out)])
    assert code == 0
    result = json.loads((out / "evaluation.json").read_text())
    assert {"auc", "aupr", "precision"} == set(result)


# ---------------------------------------------------------------------------
# rank-targets
# ---------------------------------------------------------------------------

def test_rank_targets_stdout_csv(workspace, capsys):
    data = harness.load_archive(workspace["archive"])
    drug_id = sorted(data.drugs)[0]
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--drug", drug_id, "-k", "3"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "rank,target_id,score"
    assert len(lines) == 4
    assert lines[1].split(",")[0] == "1"


def test_rank_targets_writes_csv_file(workspace, tmp_path, capsys):
    data = harness.load_archive(workspace["archive"])
    drug_id = sorted(data.drugs)[0]
    out = tmp_path / "rank"
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--drug", drug_id, "-k", "2", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader((out / "ranked_targets.csv").open()))
    assert rows[0] == ["rank", "target_id", "score"]
    assert len(rows) == 3


def test_rank_drugs_for_target(workspace, capsys):
    data = harness.load_archive(workspace["archive"])
    target_id = sorted(data.proteins)[0]
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--target", target_id, "-k", "4"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5
    returned = {line.split(",")[1] for line in lines[1:]}
    assert returned <= set(data.drugs)


def test_rank_requires_exactly_one_anchor(workspace, capsys):
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"])])
    assert code == 2
    data = harness.load_archive(workspace["archive"])
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--drug", sorted(data.drugs)[0],
                     "--target", sorted(data.proteins)[0]])
    assert code == 2


def test_rank_unknown_drug_is_data_error(workspace, capsys):
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--drug", "does_not_exist"])
    assert code == 3
    assert "unknown drug id" in capsys.readouterr().err


def test_rank_explicit_candidates(workspace, capsys):
    data = harness.load_archive(workspace["archive"])
    drug_id = sorted(data.drugs)[0]
    chosen = sorted(data.proteins)[:2]
    code = cli.main(["rank-targets", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--drug", drug_id, "--candidates", ",".join(chosen),
                     "-k", "10"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3  # header + both candidates, k clipped


# ---------------------------------------------------------------------------
# modal-similarity
# ---------------------------------------------------------------------------

def test_modal_similarity_artifacts(workspace, tmp_path, capsys):
    out = tmp_path / "sim"
    code = cli.main(["modal-similarity", str(workspace["archive"]),
                     "--checkpoint", str(workspace["checkpoint"]),
                     "--out", str(out)])
    assert code == 0
    assert (out / "modal_similarity_histograms.csv").exists()
    assert (out / "modal_similarity_values.csv").exists()
    assert (out / "modal_similarity_summary.json").exists()
    assert (out / "modal_similarity.png").exists()
    line = capsys.readouterr().out.strip()
    assert "fraction_centered=" in line


# ---------------------------------------------------------------------------
# ablate and sweep
# ---------------------------------------------------------------------------

def test_ablate_two_variants(workspace, tmp_path, capsys):
    out = tmp_path / "abl"
    code = cli.main(["ablate", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--variants", "all,seq_only", "--out", str(out)])
    assert code == 0
    rows = json.loads((out / "ablation.json").read_text())
    assert {r["variant"] for r in rows} == {"all", "seq_only"}
    table = (out / "ablation.txt").read_text()
    assert table.splitlines()[0].split() == ["Dataset", "Variant", "AUC",
                                             "AUPR", "Precision"]
    assert "seq_only" in capsys.readouterr().out


def test_ablate_unknown_variant_is_usage_error(workspace, tmp_path, capsys):
    code = cli.main(["ablate", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--variants", "all,bogus", "--out", str(tmp_path)])
    assert code == 2


def test_sweep_param_flag(workspace, tmp_path, capsys):
    out = tmp_path / "sweep"
    code = cli.main(["sweep", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--param", "dropout=0.1,0.2", "--out", str(out)])
    assert code == 0
    rows = list(csv.reader((out / "sweep.csv").open()))
    assert rows[0][0] == "dropout"
    assert len(rows) == 3
    assert json.loads((out / "sweep.json").read_text())


def test_sweep_bad_param_is_usage_error(workspace, tmp_path, capsys):
    code = cli.main(["sweep", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--param", "dropout", "--out", str(tmp_path)])
    assert code == 2
    assert "expected name=v1,v2" in capsys.readouterr().err


def test_sweep_unknown_axis_is_usage_error(workspace, tmp_path, capsys):
    code = cli.main(["sweep", str(workspace["archive"]),
                     "--config", str(workspace["config"]),
                     "--param", "momentum=0.9", "--out", str(tmp_path)])
    assert code == 2
    assert "unknown sweep parameters" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# parser-level usage errors
# ---------------------------------------------------------------------------

def test_no_command_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        cli.main([])
    assert excinfo.value.code == 2


def test_bad_variant_choice_exits_2(workspace):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["train", str(workspace["archive"]), "--variant", "bogus"])
    assert excinfo.value.code == 2
