"""Benchmark harness for response-level hallucination corpora.

Input is JSON Lines, one sample per line:

    {"id": "qa-017", "task_type": "qa", "context": ["doc one", "doc two"],
     "response": "...", "label_hallucinated": true}

``context`` accepts a string or a list of strings; ``task_type`` is one of
qa, data-to-text, summarization, other (defaulting to other); unknown fields
are ignored. Hallucinated is the positive class throughout. Samples whose
pipeline run fails are counted separately and never folded into the
confusion counts, so failures cannot inflate precision.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .aggregation import HALLUCINATED
from .backends import BackendSet, builtin_backends
from .errors import DatasetError, GroundcheckError
from .pipeline import DetectionRequest, PipelineConfig, detect

TASK_TYPES = ("qa", "data-to-text", "summarization", "other")


@dataclass(frozen=True)
class EvalSample:
    id: str
    task_type: str
    context: tuple[str, ...]
    response: str
    label_hallucinated: bool


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    failures: int = 0

    def add(self, predicted: bool, actual: bool) -> None:
        if predicted and actual:
            self.tp += 1
        elif predicted and not actual:
            self.fp += 1
        elif not predicted and actual:
            self.fn += 1
        else:
            self.tn += 1

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn + self.failures

    def prf(self) -> tuple[float, float, float]:
        return compute_prf(self.tp, self.fp, self.fn)

    def to_dict(self) -> dict:
        precision, recall, f1 = self.prf()
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "failures": self.failures,
            "precision": precision,
            "recall": recall,
            "f1": f1,
        }


@dataclass
class EvalMetrics:
    overall: ConfusionCounts = field(default_factory=ConfusionCounts)
    per_task: dict[str, ConfusionCounts] = field(default_factory=dict)
    failures: int = 0

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "per_task": {t: c.to_dict() for t, c in sorted(self.per_task.items())},
            "failures": self.failures,
        }


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def compute_prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F1 with the zero-denominator convention of 0."""
    if tp < 0 or fp < 0 or fn < 0:
        raise DatasetError("confusion counts must be nonnegative")
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return precision, recall, f1_score(precision, recall)


def _parse_sample(record: dict, line_no: int) -> EvalSample:
    for key in ("id", "context", "response", "label_hallucinated"):
        if key not in record:
            raise DatasetError(f"line {line_no}: missing required field {key!r}")
    context = record["context"]
    if isinstance(context, str):
        context = (context,)
    elif isinstance(context, list) and all(isinstance(d, str) for d in context):
        context = tuple(context)
    else:
        raise DatasetError(f"line {line_no}: context must be a string or list of strings")
    if not context or all(not d.strip() for d in context):
        raise DatasetError(f"line {line_no}: context is empty")
    response = record["response"]
    if not isinstance(response, str) or not response.strip():
        raise DatasetError(f"line {line_no}: response must be a nonempty string")
    task_type = record.get("task_type", "other")
    if task_type not in TASK_TYPES:
        task_type = "other"
    return EvalSample(
        id=str(record["id"]),
        task_type=task_type,
        context=context,
        response=response,
        label_hallucinated=bool(record["label_hallucinated"]),
    )


def load_samples(path: str | Path) -> list[EvalSample]:
    """Parse a JSONL dataset; errors always name the offending line."""
    samples = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DatasetError(f"line {line_no}: expected a JSON object")
            sample = _parse_sample(record, line_no)
            if sample.id in seen_ids:
                raise DatasetError(f"line {line_no}: duplicate id {sample.id!r}")
            seen_ids.add(sample.id)
            samples.append(sample)
    return samples


def _evaluate_one(sample: EvalSample, config: PipelineConfig, backends: BackendSet) -> dict:
    try:
        verdict = detect(
            DetectionRequest(context_documents=sample.context, output_text=sample.response),
            config,
            backends,
        )
    except GroundcheckError as exc:
        return {
            "id": sample.id,
            "task_type": sample.task_type,
            "label_hallucinated": sample.label_hallucinated,
            "error": str(exc),
        }
    return {
        "id": sample.id,
        "task_type": sample.task_type,
        "label_hallucinated": sample.label_hallucinated,
        "predicted_hallucinated": verdict.label == HALLUCINATED,
        "response_score": verdict.response_score,
        "verdict_label": verdict.label,
        "warnings": list(verdict.warnings),
        "error": None,
    }


def evaluate(
    samples: Sequence[EvalSample],
    config: Optional[PipelineConfig] = None,
    backends: Optional[BackendSet] = None,
    jobs: int = 1,
) -> tuple[EvalMetrics, list[dict]]:
    """Run the pipeline over every sample; return metrics and a verdict log.

    The verdict log is ordered by sample id regardless of ``jobs``, so the
    rendered reports are byte-identical across concurrency levels.
    """
    if not samples:
        raise DatasetError("evaluate requires at least one sample")
    config = config if config is not None else PipelineConfig()
    backends = backends if backends is not None else builtin_backends()

    if jobs <= 1:
        rows = [_evaluate_one(s, config, backends) for s in samples]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda s: _evaluate_one(s, config, backends), samples))

    rows.sort(key=lambda r: r["id"])
    metrics = EvalMetrics()
    for row in rows:
        task = row["task_type"]
        counts = metrics.per_task.setdefault(task, ConfusionCounts())
        if row["error"] is not None:
            metrics.failures += 1
            counts.failures += 1
            metrics.overall.failures += 1
            continue
        counts.add(row["predicted_hallucinated"], row["label_hallucinated"])
        metrics.overall.add(row["predicted_hallucinated"], row["label_hallucinated"])
    return metrics, rows


def render_report_json(
    metrics: EvalMetrics, rows: list[dict], config: PipelineConfig, name: str = "groundcheck"
) -> str:
    report = {
        "name": name,
        "config": config.describe(),
        "metrics": metrics.to_dict(),
        "samples": rows,
    }
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def render_report_text(metrics: EvalMetrics, name: str = "groundcheck") -> str:
    """Aligned table: one row per method, P/R/F1 per task plus overall."""
    tasks = [t for t in TASK_TYPES if t in metrics.per_task]
    header_groups = [t.upper() for t in tasks] + ["OVERALL"]
    columns = []
    for group in header_groups:
        columns.extend([f"{group} P", f"{group} R", f"{group} F1"])
    values = []
    for t in tasks:
        values.extend(metrics.per_task[t].prf())
    values.extend(metrics.overall.prf())

    name_width = max(len(name), len("method"))
    widths = [max(len(c), 7) for c in columns]
    lines = [
        "method".ljust(name_width) + "  " + "  ".join(c.rjust(w) for c, w in zip(columns, widths)),
        name.ljust(name_width)
        + "  "
        + "  ".join(f"{v:.4f}".rjust(w) for v, w in zip(values, widths)),
    ]
    if metrics.failures:
        lines.append(f"failures: {metrics.failures} sample(s) excluded from counts")
    return "\n".join(lines) + "\n"


def write_reports(
    metrics: EvalMetrics,
    rows: list[dict],
    config: PipelineConfig,
    report_dir: str | Path,
    name: str = "groundcheck",
) -> tuple[Path, Path]:
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    json_path = report_dir / "report.json"
    text_path = report_dir / "report.txt"
    json_path.write_text(render_report_json(metrics, rows, config, name), encoding="utf-8")
    text_path.write_text(render_report_text(metrics, name), encoding="utf-8")
    return json_path, text_path
