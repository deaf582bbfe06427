"""Plots and tables from a training run directory.

Every figure is written next to a CSV or JSON sidecar holding the plotted
numbers; checks read the sidecars, never the pixels.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from segworld.core.exceptions import UnreadableFile  # noqa: E402
from segworld.core.training.config import load_train_config  # noqa: E402
from segworld.core.training.schedule import self_context_probability  # noqa: E402

from .training_worker import CONFIG_FILE  # noqa: E402
from .worker_base import Worker  # noqa: E402

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ("total", "loss_mask", "loss_lm0", "loss_lm1")


def read_jsonl(path: Path) -> List[Dict[str, Any]]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def similarity_stats(matrix: np.ndarray) -> Dict[str, Optional[float]]:
    """Mean of the diagonal against the mean of everything off it; NaN entries are skipped."""
    n = matrix.shape[0]
    diagonal = np.diag(matrix) if n else np.array([])
    off = matrix[~np.eye(n, dtype=bool)] if n > 1 else np.array([])
    diagonal, off = diagonal[np.isfinite(diagonal)], off[np.isfinite(off)]
    return {
        "size": n,
        "diagonal_mean": float(diagonal.mean()) if diagonal.size else None,
        "off_diagonal_mean": float(off.mean()) if off.size else None,
        "skipped": int(np.count_nonzero(~np.isfinite(matrix))),
    }


class ReportWorker(Worker):
    """Turns train_log.jsonl, eval_log.jsonl, similarity.csv and metrics files into figures."""

    def _line_plot(self, path: Path, steps, series: Dict[str, Sequence[float]], ylabel: str):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, values in series.items():
            ax.plot(steps, values, label=label)
        ax.set_xlabel("step")
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)

    def loss_curves(self, rows: List[Dict[str, Any]], output_dir: Path) -> Path:
        steps = [row["step"] for row in rows]
        write_csv(
            output_dir / "loss_curves.csv",
            ("step",) + LOSS_COLUMNS,
            [[row["step"]] + [row[c] for c in LOSS_COLUMNS] for row in rows],
        )
        path = output_dir / "loss_curves.png"
        self._line_plot(path, steps, {c: [row[c] for row in rows] for c in LOSS_COLUMNS}, "loss")
        return path

    def schedule_curve(self, rows: List[Dict[str, Any]], run_dir: Path, output_dir: Path) -> Path:
        config = load_train_config(run_dir / CONFIG_FILE)
        steps = [row["step"] for row in rows]
        values = [self_context_probability(t, config.schedule) for t in steps]
        write_csv(output_dir / "schedule.csv", ("step", "p_self"), list(zip(steps, values)))
        path = output_dir / "schedule.png"
        self._line_plot(path, steps, {"p_self": values}, "self-generated context probability")
        return path

    def eval_curve(self, rows: List[Dict[str, Any]], output_dir: Path) -> Path:
        steps = [row["step"] for row in rows]
        write_csv(
            output_dir / "eval_curve.csv",
            ("step", "miou", "ciou", "seg_rate"),
            [[r["step"], r["miou"], r["ciou"], r["seg_rate"]] for r in rows],
        )
        path = output_dir / "eval_curve.png"
        self._line_plot(
            path, steps, {key: [r[key] for r in rows] for key in ("miou", "ciou")}, "IoU"
        )
        return path

    def similarity_heat(self, matrix: np.ndarray, output_dir: Path) -> Dict[str, Any]:
        stats = similarity_stats(matrix)
        (output_dir / "similarity_stats.json").write_text(
            json.dumps(stats, indent=2, sort_keys=True) + "\n"
        )
        fig, ax = plt.subplots(figsize=(5, 4))
        image = ax.imshow(matrix, vmin=-1.0, vmax=1.0, cmap="viridis")
        ax.set_xlabel("image / region")
        ax.set_ylabel("intent")
        fig.colorbar(image, ax=ax)
        fig.tight_layout()
        fig.savefig(output_dir / "similarity.png")
        plt.close(fig)
        return stats

    def metrics_table(self, run_dir: Path, output_dir: Path) -> List[Dict[str, Any]]:
        rows = []
        for path in sorted(run_dir.glob("metrics_*.json")):
            payload = json.loads(path.read_text())
            metrics = payload.get("metrics") or {}
            rows.append(
                {
                    "split": payload.get("split"),
                    "kind": payload.get("kind"),
                    "miou": metrics.get("miou"),
                    "ciou": metrics.get("ciou"),
                    "seg_rate": metrics.get("seg_rate"),
                    "count": metrics.get("count", 0),
                }
            )
        if rows:
            columns = list(rows[0].keys())
            write_csv(
                output_dir / "metrics_summary.csv",
                columns,
                [[row[c] for c in columns] for row in rows],
            )
        return rows

    def execute(self, run_dir: Path, output_dir: Optional[Path] = None) -> Dict[str, Any]:
        run_dir = Path(run_dir)
        log_path = run_dir / "train_log.jsonl"
        if not log_path.is_file():
            raise UnreadableFile(
                f"{run_dir} has no train_log.jsonl; "
                "point --run at a `segworld train` output directory"
            )
        output_dir = Path(output_dir) if output_dir else run_dir / "report"
        output_dir.mkdir(parents=True, exist_ok=True)

        rows = read_jsonl(log_path)
        summary: Dict[str, Any] = {"steps_logged": len(rows), "output_dir": str(output_dir)}
        if rows:
            self.loss_curves(rows, output_dir)
            summary["final_total"] = rows[-1]["total"]
            if (run_dir / CONFIG_FILE).is_file():
                self.schedule_curve(rows, run_dir, output_dir)
                summary["final_p_self"] = rows[-1]["p_self"]

        eval_path = run_dir / "eval_log.jsonl"
        if eval_path.is_file():
            evaluations = read_jsonl(eval_path)
            if evaluations:
                self.eval_curve(evaluations, output_dir)
                summary["final_eval_miou"] = evaluations[-1]["miou"]

        similarity_path = run_dir / "similarity.csv"
        if similarity_path.is_file():
            matrix = np.atleast_2d(np.loadtxt(similarity_path, delimiter=","))
            stats = self.similarity_heat(matrix, output_dir)
            summary["similarity_diagonal_mean"] = stats["diagonal_mean"]
            summary["similarity_off_diagonal_mean"] = stats["off_diagonal_mean"]

        summary["metrics_tables"] = len(self.metrics_table(run_dir, output_dir))
        logger.info(f"Report written to {output_dir}")
        return summary
