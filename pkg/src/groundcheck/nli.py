"""Entailment scoring of claims against their retrieved evidence.

Evidence is the premise and the claim is the hypothesis: a claim is grounded
when some evidence entails it. Only the entailment probability feeds the
verdict; neutral and contradiction are deliberately collapsed, since an
unsupported claim is treated the same whether the context is silent or
disagrees.

Two scoring modes exist. ``pairwise`` (default) scores each selected chunk
against the claim separately; ``packed`` joins the selected chunks, in
document order, into one premise and scores once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .chunking import Chunk
from .claims import Claim
from .errors import BackendError, ContractError
from .retrieval import ClaimEvidence

PAIRWISE = "pairwise"
PACKED = "packed"
SCORING_MODES = (PAIRWISE, PACKED)

_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EntailmentScores:
    """One backend judgment: probabilities over entail/neutral/contradict."""

    p_entail: float
    p_neutral: float
    p_contradict: float

    def __post_init__(self):
        for name, p in (
            ("p_entail", self.p_entail),
            ("p_neutral", self.p_neutral),
            ("p_contradict", self.p_contradict),
        ):
            if not 0.0 <= p <= 1.0:
                raise ContractError(f"{name} out of [0,1]: {p}")
        total = self.p_entail + self.p_neutral + self.p_contradict
        if abs(total - 1.0) > _SUM_TOLERANCE:
            raise ContractError(f"entailment triple sums to {total}, expected 1")


def score_pair(backend, premise: str, hypothesis: str) -> EntailmentScores:
    """Score one premise/hypothesis pair with the given backend."""
    try:
        scores = backend.score([(premise, hypothesis)])
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(
            f"NLI backend failed on pair (premise {len(premise)} chars, "
            f"hypothesis {len(hypothesis)} chars): {exc}"
        ) from exc
    if len(scores) != 1:
        raise BackendError(f"NLI backend returned {len(scores)} scores for 1 pair")
    return scores[0]


def _batch_score(backend, pairs: Sequence[tuple[str, str]]) -> list[EntailmentScores]:
    try:
        scores = backend.score(list(pairs))
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"NLI backend failed on a batch of {len(pairs)} pairs: {exc}") from exc
    if len(scores) != len(pairs):
        raise BackendError(
            f"NLI backend returned {len(scores)} scores for {len(pairs)} pairs"
        )
    return scores


def score_claim(
    backend,
    mode: str,
    claim: Claim,
    evidence: ClaimEvidence,
    chunks: Sequence[Chunk],
    hypothesis_text: str | None = None,
) -> ClaimEvidence:
    """Fill ``evidence.entailment`` for one claim.

    ``hypothesis_text`` overrides the claim text when the pipeline had to
    truncate an overlong claim for scoring; the claim object itself keeps
    the original span.
    """
    if mode not in SCORING_MODES:
        raise ContractError(f"unknown scoring mode: {mode!r}")
    if evidence.selected_k < 1:
        raise ContractError(f"claim {claim.claim_index} has no selected evidence")
    hypothesis = hypothesis_text if hypothesis_text is not None else claim.text

    selected = evidence.selected_chunk_indices()
    premises = []
    for rank_pos, chunk_idx in enumerate(selected):
        text = chunks[chunk_idx].text
        if rank_pos == 0 and evidence.truncated_top is not None:
            text = evidence.truncated_top
        premises.append((chunk_idx, text))

    if mode == PACKED:
        joined = "\n".join(text for _, text in sorted(premises, key=lambda p: p[0]))
        evidence.entailment = [score_pair(backend, joined, hypothesis)]
        return evidence

    evidence.entailment = _batch_score(
        backend, [(text, hypothesis) for _, text in premises]
    )
    return evidence
