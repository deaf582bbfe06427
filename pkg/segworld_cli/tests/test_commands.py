"""
End-to-end tests of the experiment commands through the CLI entry point.
"""

import json

import pytest
import yaml

from segworld.core.benchkit.ingest import sidecar_path
from segworld_cli.cmd import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from segworld_cli.manifest import MANIFEST_FILE

SMALL_CONFIG = {
    "warmup_steps": 2,
    "steps": 3,
    "batch_size": 4,
    "hidden_dim": 16,
    "num_layers": 1,
    "num_heads": 2,
    "prompt_dim": 8,
    "intent_mix": 0.5,
}


def run(argv, capsys):
    """Run the CLI with JSON output and return (exit code, parsed summary)."""
    code = main(["--format", "json"] + argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


@pytest.fixture
def dataset(tmp_path, capsys):
    path = tmp_path / "data" / "toy.jsonl"
    code, _ = run(
        ["toy-dataset", "--out", str(path), "--train", "8", "--test", "4", "--seed", "0"], capsys
    )
    assert code == EXIT_OK
    return path


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "train.yaml"
    path.write_text(yaml.safe_dump(SMALL_CONFIG))
    return path


def test_toy_dataset(tmp_path, capsys):
    """
    Test that the dataset, its sidecar and the manifest are written.
    """
    path = tmp_path / "toy.jsonl"

    code, summary = run(["toy-dataset", "--out", str(path), "--train", "8", "--test", "4"], capsys)

    assert code == EXIT_OK
    assert summary["train"] == 8
    assert summary["test_official"] == 4
    assert summary["test_overlap"] == 1
    assert len(path.read_text().splitlines()) == 12
    assert sidecar_path(path).is_file()
    assert (tmp_path / MANIFEST_FILE).is_file()


def test_toy_dataset_negative_count(tmp_path):
    assert main(["toy-dataset", "--out", str(tmp_path / "t.jsonl"), "--train", "-1"]) == EXIT_USAGE


def test_split(dataset, tmp_path, capsys):
    out = tmp_path / "split"

    code, counts = run(["split", "--dataset", str(dataset), "--out", str(out)], capsys)

    assert code == EXIT_OK
    assert counts == {"train": 8, "test_official": 4, "test_clean": 3, "test_overlap": 1}
    payload = json.loads((out / "splits.json").read_text())
    assert payload["leakage"]["shared_bases"] == 1
    assert len(payload["splits"]["test_clean"]) == 3
    manifest = json.loads((out / MANIFEST_FILE).read_text())
    assert payload["manifest_hash"] == manifest["hash"]


def test_missing_dataset(tmp_path):
    assert main(["split", "--dataset", str(tmp_path / "missing.jsonl")]) == EXIT_USAGE


class TestEvalCommand:
    """Test suite for `segworld eval`."""

    def test_oracle_scores_perfectly(self, dataset, tmp_path, capsys):
        # Arrange
        out = tmp_path / "eval"

        # Act
        code, rows = run(["eval", "--dataset", str(dataset), "--oracle", "--out", str(out)], capsys)

        # Assert
        assert code == EXIT_OK
        assert len(rows) == 6
        assert all(row["miou"] == 1.0 and row["seg_rate"] == 1.0 for row in rows)
        metrics = json.loads((out / "metrics_clean_intent.json").read_text())
        assert metrics["metrics"]["count"] == 3
        assert (out / "per_action_official_reasoning.csv").is_file()

    def test_rerun_is_byte_identical(self, dataset, tmp_path, capsys):
        out = tmp_path / "eval"
        argv = ["eval", "--dataset", str(dataset), "--oracle", "--split", "clean"]
        argv += ["--out", str(out)]

        assert run(argv, capsys)[0] == EXIT_OK
        first = {p.name: p.read_bytes() for p in out.iterdir() if p.name != MANIFEST_FILE}
        assert run(argv, capsys)[0] == EXIT_OK
        second = {p.name: p.read_bytes() for p in out.iterdir() if p.name != MANIFEST_FILE}

        assert first == second
        assert sorted(first) == sorted(
            f"{stem}_clean_{kind}.{ext}"
            for stem, ext in (("metrics", "json"), ("per_action", "csv"), ("records", "jsonl"))
            for kind in ("intent", "reasoning", "referring")
        )

    def test_single_kind(self, dataset, tmp_path, capsys):
        code, rows = run(
            [
                "eval",
                "--dataset",
                str(dataset),
                "--oracle",
                "--split",
                "official",
                "--kind",
                "intent",
                "--out",
                str(tmp_path / "eval"),
            ],
            capsys,
        )

        assert code == EXIT_OK
        assert [(row["split"], row["kind"], row["count"]) for row in rows] == [
            ("official", "intent", 4)
        ]

    def test_needs_a_model(self, dataset, tmp_path):
        argv = ["eval", "--dataset", str(dataset), "--out", str(tmp_path / "eval")]

        assert main(argv) == EXIT_USAGE

    def test_samples_must_be_positive(self, dataset, tmp_path):
        argv = ["eval", "--dataset", str(dataset), "--oracle", "--samples", "0"]

        assert main(argv + ["--out", str(tmp_path / "eval")]) == EXIT_USAGE


class TestValidateCommand:
    """Test suite for `segworld validate`."""

    def test_clean_dataset(self, dataset, tmp_path, capsys):
        code, summary = run(
            ["validate", "--dataset", str(dataset), "--out", str(tmp_path / "v")], capsys
        )

        assert code == EXIT_OK
        assert summary["accepted"] == 12
        assert summary["intent_failures"] == 0

    def test_leaking_intent_fails(self, dataset, tmp_path, capsys):
        # Arrange
        lines = dataset.read_text().splitlines()
        record = json.loads(lines[0])
        record["instructions"]["intent"] = f"I want the {record['chain']['part']} of it."
        lines[0] = json.dumps(record)
        dataset.write_text("\n".join(lines) + "\n")
        out = tmp_path / "v"

        # Act
        code, summary = run(["validate", "--dataset", str(dataset), "--out", str(out)], capsys)

        # Assert
        assert code == EXIT_FAILED
        assert summary["intent_failures"] == 1
        assert summary["accepted"] == 11
        lines = (out / "diagnostics.jsonl").read_text().splitlines()
        diagnostics = [json.loads(line) for line in lines]
        assert {d["code"] for d in diagnostics} == {"ValidatorRejected"}
        assert all(d["line"] == 1 for d in diagnostics)

    def test_bad_lexicon(self, dataset, tmp_path):
        lexicon = tmp_path / "lexicon.json"
        lexicon.write_text("[1, 2]")

        argv = ["validate", "--dataset", str(dataset), "--lexicon", str(lexicon)]

        assert main(argv + ["--out", str(tmp_path / "v")]) == EXIT_USAGE


class TestTrainingCommands:
    """Test suite for train, eval --checkpoint, report and ablate."""

    def test_train_eval_report(self, dataset, config_file, tmp_path, capsys):
        # Arrange
        run_dir = tmp_path / "run"

        # Act
        code, summary = run(
            [
                "train",
                "--config",
                str(config_file),
                "--dataset",
                str(dataset),
                "--out",
                str(run_dir),
            ],
            capsys,
        )

        # Assert
        assert code == EXIT_OK
        assert summary["steps"] == 3
        for name in ("model.ckpt", "train_log.jsonl", "config.yaml", "similarity.csv"):
            assert (run_dir / name).is_file()

        checkpoint = run_dir / "model.ckpt"
        code, rows = run(
            [
                "eval",
                "--dataset",
                str(dataset),
                "--checkpoint",
                str(checkpoint),
                "--split",
                "clean",
                "--kind",
                "intent",
                "--out",
                str(run_dir),
            ],
            capsys,
        )
        assert code == EXIT_OK
        assert rows[0]["count"] == 3

        code, report = run(["report", "--run", str(run_dir)], capsys)
        assert code == EXIT_OK
        assert report["steps_logged"] == 3
        assert report["metrics_tables"] == 1
        assert (run_dir / "report" / "loss_curves.csv").is_file()
        assert (run_dir / "report" / "schedule.csv").is_file()

    def test_train_without_dataset(self, config_file, tmp_path):
        assert main(["train", "--config", str(config_file), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_unknown_config_key(self, dataset, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text("warmup_steps: 2\nlearning_rat: 0.1\n")

        argv = ["train", "--config", str(config), "--dataset", str(dataset)]

        assert main(argv + ["--out", str(tmp_path / "run")]) == EXIT_USAGE

    def test_report_on_empty_directory(self, tmp_path):
        assert main(["report", "--run", str(tmp_path)]) == EXIT_USAGE

    def test_report_on_missing_directory(self, tmp_path):
        assert main(["report", "--run", str(tmp_path / "missing")]) == EXIT_USAGE

    def test_ablate(self, dataset, tmp_path, capsys):
        config = tmp_path / "ablate.yaml"
        config.write_text(yaml.safe_dump({**SMALL_CONFIG, "steps": 1}))
        out = tmp_path / "ablate"

        code, rows = run(
            ["ablate", "--config", str(config), "--dataset", str(dataset), "--out", str(out)],
            capsys,
        )

        assert code == EXIT_OK
        assert [row["variant"] for row in rows] == [
            "full",
            "w/o event level",
            "w/o proactive context",
            "w/o Stage-1 CoT",
        ]
        for directory in ("full", "no_events", "no_context", "no_cot"):
            assert (out / directory / "model.ckpt").is_file()
        assert (out / "ablation.csv").is_file()
