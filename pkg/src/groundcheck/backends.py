"""Model backends: deterministic built-ins plus a remote JSON-over-HTTP client.

Three roles exist — embedder, entailment scorer, claim classifier — each with
a builtin implementation that needs no model weights:

* mock embedder: hashed character trigrams, 64 dimensions, L2-normalized;
* containment entailment scorer: fraction of the hypothesis's content tokens
  (lowercased alphanumerics minus a fixed 30-word stopword list) present in
  the premise;
* heuristic claim classifier: the rule table in :mod:`groundcheck.claims`.

All built-ins are pure and platform-independent (crc32 bucketing, integer
counts before normalization). Real models run out of process behind the wire
protocol:

    POST /embed            {"texts": [str]}   -> {"vectors": [[float]]}
    POST /nli              {"pairs": [{"premise": str, "hypothesis": str}]}
                                              -> {"scores": [{"entail": e,
                                                  "neutral": n, "contradict": c}]}
    POST /classify_factual {"texts": [str]}   -> {"probs": [float]}
"""

from __future__ import annotations

import logging
import re
import time
import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Sequence

import numpy as np
import requests

from .claims import DEFAULT_GREETING_LEXICON, heuristic_factual_prob
from .errors import BackendUnavailableError, ConfigError, ContractError, ProtocolError
from .nli import EntailmentScores

logger = logging.getLogger(__name__)

EMBEDDING_DIM = 64
_TRIGRAM_SEED = 0x5EED

# 30 high-frequency function words ignored by the containment scorer.
STOPWORDS = frozenset(
    [
        "a", "an", "the", "is", "are", "was", "were", "be", "been", "being",
        "of", "in", "on", "at", "to", "for", "with", "by", "from", "as",
        "and", "or", "but", "not", "it", "its", "this", "that", "these", "those",
    ]
)

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


class EmbedderBackend(Protocol):
    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


class NLIBackend(Protocol):
    def score(self, pairs: Sequence[tuple[str, str]]) -> list[EntailmentScores]: ...


class ClaimClassifierBackend(Protocol):
    def classify(self, texts: Sequence[str]) -> list[float]: ...


@lru_cache(maxsize=1 << 16)
def _trigram_bucket(trigram: str) -> int:
    return zlib.crc32(trigram.encode("utf-8"), _TRIGRAM_SEED) % EMBEDDING_DIM


class MockEmbedder:
    """Hashed-trigram embeddings: lexically similar texts rank near each other."""

    dim = EMBEDDING_DIM

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self._embed_one(t) for t in texts]

    @staticmethod
    def _embed_one(text: str) -> np.ndarray:
        counts = np.zeros(EMBEDDING_DIM, dtype=np.float64)
        lowered = text.lower()
        for i in range(len(lowered) - 2):
            counts[_trigram_bucket(lowered[i : i + 3])] += 1.0
        norm = np.linalg.norm(counts)
        if norm == 0.0:
            return counts
        return counts / norm


def content_tokens(text: str) -> set[str]:
    """Lowercased alphanumeric tokens of ``text`` minus the stopword list."""
    return {w for w in (m.group(0).lower() for m in _WORD_RE.finditer(text)) if w not in STOPWORDS}


class ContainmentNLI:
    """Deterministic entailment oracle: hypothesis-token containment.

    p_entail is the fraction of the hypothesis's content tokens found in the
    premise (1.0 when the hypothesis has none); contradiction is always 0 and
    the remainder is neutral.
    """

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[EntailmentScores]:
        out = []
        for premise, hypothesis in pairs:
            hyp = content_tokens(hypothesis)
            if not hyp:
                p = 1.0
            else:
                prem = content_tokens(premise)
                p = len(hyp & prem) / len(hyp)
            out.append(EntailmentScores(p_entail=p, p_neutral=1.0 - p, p_contradict=0.0))
        return out


class HeuristicClaimClassifier:
    """Backend wrapper around the heuristic factual-claim rule table."""

    def __init__(self, lexicon: Sequence[str] = DEFAULT_GREETING_LEXICON):
        self.lexicon = tuple(p.lower() for p in lexicon)

    def classify(self, texts: Sequence[str]) -> list[float]:
        return [heuristic_factual_prob(t, self.lexicon) for t in texts]


@dataclass(frozen=True)
class BackendSet:
    """The three model roles the pipeline needs, bundled."""

    embedder: EmbedderBackend
    nli: NLIBackend
    claim_classifier: ClaimClassifierBackend


def builtin_backends() -> BackendSet:
    return BackendSet(
        embedder=MockEmbedder(),
        nli=ContainmentNLI(),
        claim_classifier=HeuristicClaimClassifier(),
    )


# ---------------------------------------------------------------------------
# Remote backends
# ---------------------------------------------------------------------------

MOCK_EMBEDDER = "mock-embedder"
ORACLE_NLI = "oracle-nli"
HEURISTIC_CLAIMS = "heuristic-claims"
REMOTE = "remote"

_BACKOFF_BASE_MS = 250


@dataclass(frozen=True)
class BackendDescriptor:
    kind: str
    endpoint: str = ""
    timeout_ms: int = 10000
    max_batch: int = 32
    retries: int = 2

    def __post_init__(self):
        if self.kind == REMOTE and not self.endpoint:
            raise ConfigError("remote backend requires an endpoint")
        if self.timeout_ms <= 0:
            raise ConfigError("timeout must be positive")
        if self.max_batch < 1:
            raise ConfigError("max_batch must be positive")
        if self.retries < 0:
            raise ConfigError("retries must be nonnegative")


def remote_call(descriptor: BackendDescriptor, route: str, payload: dict) -> dict:
    """POST JSON to endpoint+route, retrying transport errors and 5xx."""
    if descriptor.kind != REMOTE:
        raise ConfigError("remote_call requires a remote descriptor")
    url = descriptor.endpoint.rstrip("/") + route
    timeout = descriptor.timeout_ms / 1000.0
    attempts = descriptor.retries + 1
    last_error = None
    for attempt in range(attempts):
        if attempt > 0:
            time.sleep(_BACKOFF_BASE_MS / 1000.0 * (2 ** (attempt - 1)))
        try:
            response = requests.post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last_error = f"transport error: {exc}"
            logger.warning("remote call %s attempt %d failed: %s", route, attempt + 1, exc)
            continue
        if response.status_code >= 500:
            last_error = f"server error {response.status_code}"
            logger.warning(
                "remote call %s attempt %d got %d", route, attempt + 1, response.status_code
            )
            continue
        if response.status_code != 200:
            raise ProtocolError(f"{url} returned status {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise ProtocolError(f"{url} returned non-JSON body: {exc}") from exc
    raise BackendUnavailableError(f"{url} unavailable after {attempts} attempts: {last_error}")


def _batched(items: Sequence, size: int):
    for i in range(0, len(items), size):
        yield items[i : i + size]


class RemoteEmbedder:
    def __init__(self, descriptor: BackendDescriptor):
        self.descriptor = descriptor

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors: list[np.ndarray] = []
        expected_dim = None
        for batch in _batched(list(texts), self.descriptor.max_batch):
            body = remote_call(self.descriptor, "/embed", {"texts": batch})
            got = body.get("vectors")
            if not isinstance(got, list) or len(got) != len(batch):
                raise ProtocolError(
                    f"/embed returned {0 if not isinstance(got, list) else len(got)} "
                    f"vectors for {len(batch)} texts"
                )
            for vec in got:
                arr = np.asarray(vec, dtype=np.float64)
                if arr.ndim != 1 or arr.size == 0:
                    raise ProtocolError("/embed vector is not a flat nonempty list")
                if expected_dim is None:
                    expected_dim = arr.size
                elif arr.size != expected_dim:
                    raise ProtocolError("/embed vectors disagree on dimension")
                if not np.all(np.isfinite(arr)):
                    raise ProtocolError("/embed vector contains NaN or Inf")
                vectors.append(arr)
        return vectors


class RemoteNLI:
    def __init__(self, descriptor: BackendDescriptor):
        self.descriptor = descriptor

    def score(self, pairs: Sequence[tuple[str, str]]) -> list[EntailmentScores]:
        scores: list[EntailmentScores] = []
        for batch in _batched(list(pairs), self.descriptor.max_batch):
            payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in batch]}
            body = remote_call(self.descriptor, "/nli", payload)
            got = body.get("scores")
            if not isinstance(got, list) or len(got) != len(batch):
                raise ProtocolError(
                    f"/nli returned {0 if not isinstance(got, list) else len(got)} "
                    f"scores for {len(batch)} pairs"
                )
            for item in got:
                try:
                    triple = EntailmentScores(
                        p_entail=float(item["entail"]),
                        p_neutral=float(item["neutral"]),
                        p_contradict=float(item["contradict"]),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise ProtocolError(f"/nli score entry malformed: {item!r}") from exc
                except ContractError as exc:
                    raise ProtocolError(f"/nli score entry invalid: {exc}") from exc
                scores.append(triple)
        return scores


class RemoteClaimClassifier:
    def __init__(self, descriptor: BackendDescriptor):
        self.descriptor = descriptor

    def classify(self, texts: Sequence[str]) -> list[float]:
        probs: list[float] = []
        for batch in _batched(list(texts), self.descriptor.max_batch):
            body = remote_call(self.descriptor, "/classify_factual", {"texts": batch})
            got = body.get("probs")
            if not isinstance(got, list) or len(got) != len(batch):
                raise ProtocolError(
                    f"/classify_factual returned {0 if not isinstance(got, list) else len(got)} "
                    f"probs for {len(batch)} texts"
                )
            for p in got:
                p = float(p)
                if not 0.0 <= p <= 1.0:
                    raise ProtocolError(f"/classify_factual prob out of [0,1]: {p}")
                probs.append(p)
        return probs


def remote_backends(endpoint: str, **kwargs) -> BackendSet:
    descriptor = BackendDescriptor(kind=REMOTE, endpoint=endpoint, **kwargs)
    return BackendSet(
        embedder=RemoteEmbedder(descriptor),
        nli=RemoteNLI(descriptor),
        claim_classifier=RemoteClaimClassifier(descriptor),
    )
