"""End-to-end detection for one (context documents, output) pair.

The stages, in order: split the output into claims; drop non-factual claims;
chunk the joined context at a size calibrated to the claim lengths; embed,
rank, and pack per-claim evidence under the token window; score each
claim/evidence pair for entailment; aggregate into claim verdicts and a
response verdict. Every claim of the output appears in the verdict — scored
or filtered — with its character span, so findings can be traced back to the
exact output text.

Deterministic backends make the whole pipeline deterministic: identical
request and config produce an identical verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from . import nli
from .aggregation import (
    AggregationConfig,
    ClaimVerdict,
    NON_FACTUAL_UNSCORED,
    ResponseVerdict,
    claim_label,
    claim_score,
    classify_response,
    response_score,
)
from .backends import BackendSet, builtin_backends
from .chunking import (
    CONTEXT_CHUNK_MIN_TOKENS,
    Chunk,
    ChunkerConfig,
    chunk_context,
    split_output_into_claims,
)
from .claims import Claim, DEFAULT_FACTUAL_THRESHOLD, classify_factual, filter_claims
from .errors import BackendError, ContractError
from .retrieval import ClaimEvidence, PackingBudget, rank_chunks, select_k
from .tokens import TokenCounter, apply_margin, budgeted_count, truncate_to_budget

DOC_SEPARATOR = "\n\n"
CLAIM_BAND_TOKENS = 16


@dataclass(frozen=True)
class DetectionRequest:
    context_documents: tuple[str, ...]
    output_text: str

    def __post_init__(self):
        if len(self.context_documents) == 0:
            raise ContractError("at least one context document is required")


@dataclass(frozen=True)
class PipelineConfig:
    claim_chunker: ChunkerConfig = field(default_factory=ChunkerConfig)
    budget: PackingBudget = field(default_factory=PackingBudget)
    claim_threshold: float = DEFAULT_FACTUAL_THRESHOLD
    aggregation: AggregationConfig = field(default_factory=AggregationConfig)
    mode: str = nli.PAIRWISE
    counter: TokenCounter = field(default_factory=TokenCounter)

    def __post_init__(self):
        if self.mode not in nli.SCORING_MODES:
            raise ContractError(f"unknown scoring mode: {self.mode!r}")

    def describe(self) -> dict:
        """Stable, JSON-ready echo of every knob that affects results."""
        return {
            "claim_s_max": self.claim_chunker.s_max,
            "claim_o_max": self.claim_chunker.o_max,
            "window": self.budget.window,
            "fixed_reserve": self.budget.fixed_reserve,
            "per_chunk_reserve": self.budget.per_chunk_reserve,
            "k_target": self.budget.k_target,
            "k_max": self.budget.k_max,
            "context_overlap": self.budget.context_overlap,
            "claim_threshold": self.claim_threshold,
            "beta": self.aggregation.beta,
            "theta": self.aggregation.theta,
            "mode": self.mode,
            "counter_kind": self.counter.kind,
            "safety_margin": self.counter.safety_margin,
        }


def _join_context(documents: Sequence[str]) -> tuple[str, list[tuple[int, int]]]:
    """Join documents and record each document's [start, end) in the result."""
    spans = []
    pos = 0
    for doc in documents:
        spans.append((pos, pos + len(doc)))
        pos += len(doc) + len(DOC_SEPARATOR)
    return DOC_SEPARATOR.join(documents), spans


def _doc_index_for_span(doc_spans: list[tuple[int, int]], start: int, end: int) -> int:
    """Document owning the majority of [start, end); ties go to the earlier doc.

    Chunks can cross document joins (overlap extension, or two short documents
    merged into one chunk), so attribution goes by covered characters.
    """
    best, best_cover = 0, -1
    for i, (ds, de) in enumerate(doc_spans):
        cover = min(end, de) - max(start, ds)
        if cover > best_cover:
            best, best_cover = i, cover
    return best


def _max_claim_budget(budget: PackingBudget) -> int:
    """Largest budgeted claim size that still admits one minimal chunk."""
    return budget.window - budget.fixed_reserve - budget.per_chunk_reserve - CONTEXT_CHUNK_MIN_TOKENS


def _filtered_verdict(claim: Claim) -> ClaimVerdict:
    return ClaimVerdict(
        claim_index=claim.claim_index,
        text=claim.text,
        start=claim.start,
        end=claim.end,
        label=NON_FACTUAL_UNSCORED,
        factual_prob=claim.factual_prob,
    )


def detect(
    request: DetectionRequest,
    config: Optional[PipelineConfig] = None,
    backends: Optional[BackendSet] = None,
) -> ResponseVerdict:
    """Run the full detection pipeline for one request."""
    config = config if config is not None else PipelineConfig()
    backends = backends if backends is not None else builtin_backends()
    counter = config.counter
    budget = config.budget
    warnings: list[str] = []

    # 1. Split the output into claims.
    claims = split_output_into_claims(config.claim_chunker, counter, request.output_text)
    if not claims:
        return classify_response(None, config.aggregation, [], ["output produced no claims"])

    # 2. Classify and filter non-factual claims.
    try:
        classified = classify_factual(backends.claim_classifier, claims)
    except BackendError as exc:
        raise BackendError(f"claim classification stage failed: {exc}") from exc
    kept = filter_claims(classified, config.claim_threshold)
    filtered_out = {c.claim_index: c for c in classified if c.factual_prob < config.claim_threshold}
    if not kept:
        verdicts = [_filtered_verdict(c) for c in classified]
        return classify_response(
            None, config.aggregation, verdicts, ["all claims filtered as non-factual"]
        )

    # Truncate claims that would crowd evidence out of the window entirely.
    scoring_texts: dict[int, str] = {}
    scoring_tokens: dict[int, int] = {}
    max_claim = _max_claim_budget(budget)
    for claim in kept:
        tokens = budgeted_count(counter, claim.text)
        if tokens > max_claim:
            truncated = truncate_to_budget(counter, claim.text, max_claim)
            warnings.append(
                f"claim {claim.claim_index} truncated from {tokens} to "
                f"{budgeted_count(counter, truncated)} budgeted tokens to fit the window"
            )
            scoring_texts[claim.claim_index] = truncated
            scoring_tokens[claim.claim_index] = budgeted_count(counter, truncated)
        else:
            scoring_texts[claim.claim_index] = claim.text
            scoring_tokens[claim.claim_index] = tokens

    # 3. Chunk the joined context once per claim-length band.
    context, doc_spans = _join_context(request.context_documents)
    bands: dict[int, int] = {}
    for claim in kept:
        band = scoring_tokens[claim.claim_index] // CLAIM_BAND_TOKENS
        bands[band] = max(bands.get(band, 0), scoring_tokens[claim.claim_index])
    band_chunks: dict[int, list[Chunk]] = {}
    for band, representative in sorted(bands.items()):
        chunks = chunk_context(counter, context, representative, budget)
        chunks = [
            replace(c, doc_index=_doc_index_for_span(doc_spans, c.start, c.end))
            for c in chunks
        ]
        band_chunks[band] = chunks

    if all(not chunks for chunks in band_chunks.values()):
        warnings.append("context produced no chunks; factual claims scored 0.0")

    # 4. Embed once per request, then rank and pack per claim.
    try:
        claim_vecs = backends.embedder.embed(
            [scoring_texts[c.claim_index] for c in kept]
        )
        band_vecs = {
            band: backends.embedder.embed([c.text for c in chunks]) if chunks else []
            for band, chunks in band_chunks.items()
        }
    except BackendError as exc:
        raise BackendError(f"embedding stage failed: {exc}") from exc

    scored: list[tuple[Claim, float, Optional[int]]] = []
    for pos, claim in enumerate(kept):
        band = scoring_tokens[claim.claim_index] // CLAIM_BAND_TOKENS
        chunks = band_chunks[band]
        if not chunks:
            scored.append((claim, 0.0, None))
            continue

        ranked = rank_chunks(claim_vecs[pos], band_vecs[band])
        claim_tokens = scoring_tokens[claim.claim_index]
        ranked_budgets = [apply_margin(counter, chunks[idx].token_count) for idx, _ in ranked]
        selection = select_k(budget, claim_tokens, ranked_budgets)

        truncated_top = None
        if selection.top_chunk_budget is not None:
            top_idx = ranked[0][0]
            truncated_top = truncate_to_budget(
                counter, chunks[top_idx].text, selection.top_chunk_budget
            )
            warnings.append(
                f"top chunk for claim {claim.claim_index} truncated to "
                f"{selection.top_chunk_budget} budgeted tokens"
            )

        evidence = ClaimEvidence(
            claim_index=claim.claim_index,
            ranked=ranked,
            selected_k=selection.k,
            truncated_top=truncated_top,
        )
        _assert_packing_safety(counter, budget, claim_tokens, evidence, chunks)

        # 5. Score the claim against its evidence.
        try:
            evidence = nli.score_claim(
                backends.nli,
                config.mode,
                claim,
                evidence,
                chunks,
                hypothesis_text=scoring_texts[claim.claim_index],
            )
        except BackendError as exc:
            raise BackendError(
                f"NLI stage failed at claim {claim.claim_index} "
                f"({len(scored)} of {len(kept)} claims already scored): {exc}"
            ) from exc

        # 6a. Reduce to the claim's grounding score.
        probs = [s.p_entail for s in evidence.entailment]
        g = claim_score(probs)
        if config.mode == nli.PACKED:
            best_idx = evidence.ranked[0][0]
        else:
            best_idx = evidence.selected_chunk_indices()[probs.index(max(probs))]
        scored.append((claim, g, best_idx))

    # 6b. Aggregate into the response verdict.
    verdict_entries: dict[int, ClaimVerdict] = {
        idx: _filtered_verdict(c) for idx, c in filtered_out.items()
    }
    for claim, g, best_idx in scored:
        best_doc = None
        if best_idx is not None:
            band = scoring_tokens[claim.claim_index] // CLAIM_BAND_TOKENS
            best_doc = band_chunks[band][best_idx].doc_index
        verdict_entries[claim.claim_index] = ClaimVerdict(
            claim_index=claim.claim_index,
            text=claim.text,
            start=claim.start,
            end=claim.end,
            label=claim_label(g, config.aggregation),
            factual_prob=claim.factual_prob,
            grounding_score=g,
            best_chunk_index=best_idx,
            best_chunk_doc=best_doc,
        )
    ordered = [verdict_entries[i] for i in sorted(verdict_entries)]
    score = response_score([g for _, g, _ in scored], config.aggregation)
    return classify_response(score, config.aggregation, ordered, warnings)


def _assert_packing_safety(
    counter: TokenCounter,
    budget: PackingBudget,
    claim_tokens: int,
    evidence: ClaimEvidence,
    chunks: Sequence[Chunk],
) -> None:
    """Hard guarantee checked on every run: the scoring window never overflows."""
    total = claim_tokens + budget.fixed_reserve
    for rank_pos, chunk_idx in enumerate(evidence.selected_chunk_indices()):
        if rank_pos == 0 and evidence.truncated_top is not None:
            total += budgeted_count(counter, evidence.truncated_top)
        else:
            total += apply_margin(counter, chunks[chunk_idx].token_count)
        total += budget.per_chunk_reserve
    if total > budget.window:
        raise ContractError(
            f"packing safety violated for claim {evidence.claim_index}: "
            f"{total} > {budget.window} budgeted tokens"
        )
