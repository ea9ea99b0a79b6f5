#!/usr/bin/env python3
"""Convert the RAGTruth corpus's native layout into the bench JSONL format.

RAGTruth ships two files: ``response.jsonl`` (one model response per line,
with span-level annotations in ``labels``) and ``source_info.jsonl`` (the
prompt context per ``source_id``). This script joins them and emits one
bench sample per response:

    {"id", "task_type", "context", "response", "label_hallucinated"}

Label construction: a response is hallucinated iff its ``labels`` list is
non-empty, i.e. the annotators marked at least one hallucinated span. That
collapses the corpus's span-level annotation to the response level; there
is no finer signal in the output.

Task types map as QA -> qa, Data2txt -> data-to-text, Summary ->
summarization; anything else becomes other. Context extraction per task:
a dict with a "passages" entry uses the passages text, a plain string is
used as-is, and any other structure is serialized as stable JSON.

Usage:
    python tools/ragtruth_to_jsonl.py --responses response.jsonl \
        --sources source_info.jsonl --out ragtruth_test.jsonl --split test
"""

from __future__ import annotations

import argparse
import json
import sys

TASK_MAP = {
    "QA": "qa",
    "Data2txt": "data-to-text",
    "Summary": "summarization",
}


def read_jsonl(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SystemExit(f"{path} line {line_no}: invalid JSON: {exc}")
    return records


def extract_context(source_info) -> list[str]:
    if isinstance(source_info, str):
        return [source_info]
    if isinstance(source_info, dict):
        passages = source_info.get("passages")
        if isinstance(passages, str) and passages.strip():
            return [passages]
        return [json.dumps(source_info, sort_keys=True, ensure_ascii=False)]
    return [json.dumps(source_info, sort_keys=True, ensure_ascii=False)]


def convert(responses, sources, split=None):
    by_source = {s["source_id"]: s for s in sources if "source_id" in s}
    samples = []
    skipped = 0
    for record in responses:
        if split and record.get("split") != split:
            continue
        source = by_source.get(record.get("source_id"))
        if source is None or "response" not in record or "id" not in record:
            skipped += 1
            continue
        response = record["response"]
        if not isinstance(response, str) or not response.strip():
            skipped += 1
            continue
        samples.append(
            {
                "id": str(record["id"]),
                "task_type": TASK_MAP.get(source.get("task_type"), "other"),
                "context": extract_context(source.get("source_info")),
                "response": response,
                "label_hallucinated": bool(record.get("labels")),
            }
        )
    return samples, skipped


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--responses", required=True, help="RAGTruth response.jsonl")
    parser.add_argument("--sources", required=True, help="RAGTruth source_info.jsonl")
    parser.add_argument("--out", required=True, help="bench-format JSONL to write")
    parser.add_argument("--split", default=None, help="keep only this split (e.g. test)")
    args = parser.parse_args(argv)

    samples, skipped = convert(read_jsonl(args.responses), read_jsonl(args.sources), args.split)
    with open(args.out, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample, ensure_ascii=False) + "\n")
    print(f"wrote {len(samples)} samples to {args.out}" + (f" ({skipped} skipped)" if skipped else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
