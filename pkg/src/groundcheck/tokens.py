"""Token counting for every budget decision in the pipeline.

The builtin counter is deterministic and model-free: a token is either a
maximal run of alphanumeric characters or a single punctuation character;
whitespace contributes nothing. Real subword tokenizers count differently,
so budget checks multiply builtin counts by a safety margin (default 1.3)
to stay conservative against a 512-token encoder window. Budgeted counts
are used only for budgeting, never for reporting.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ConfigError

# Alphanumeric runs (underscore excluded), then underscore and any other
# non-space character as single tokens.
_TOKEN_RE = re.compile(r"[^\W_]+|_|[^\w\s]", re.UNICODE)

BUILTIN = "builtin"
BACKEND_SUPPLIED = "backend-supplied"

DEFAULT_SAFETY_MARGIN = 1.3


def builtin_token_count(text: str) -> int:
    """Count tokens with the builtin rule. Deterministic and total."""
    if not text:
        return 0
    return len(_TOKEN_RE.findall(text))


@dataclass(frozen=True)
class TokenCounter:
    """A token counting strategy plus the safety margin used for budgeting.

    ``kind`` is ``builtin`` unless ``count_fn`` is supplied, in which case
    counts come from the backend's own tokenizer and the margin is usually 1.0.
    """

    kind: str = BUILTIN
    safety_margin: float = DEFAULT_SAFETY_MARGIN
    count_fn: Optional[Callable[[str], int]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.safety_margin < 1.0:
            raise ConfigError(f"safety_margin must be >= 1.0, got {self.safety_margin}")
        if self.kind == BACKEND_SUPPLIED and self.count_fn is None:
            raise ConfigError("backend-supplied counter requires count_fn")
        if self.kind == BUILTIN and self.count_fn is not None:
            raise ConfigError("builtin counter must not carry count_fn")
        if self.kind not in (BUILTIN, BACKEND_SUPPLIED):
            raise ConfigError(f"unknown counter kind: {self.kind!r}")


def count_tokens(counter: TokenCounter, text: str) -> int:
    """Raw token count of ``text`` under ``counter``. count("") == 0."""
    if counter.count_fn is not None:
        return counter.count_fn(text)
    return builtin_token_count(text)


def budgeted_count(counter: TokenCounter, text: str) -> int:
    """ceil(count * safety_margin), used for window-budget checks only.

    The 1e-9 slack absorbs float artifacts (20 * 1.3 == 26.000000000000004).
    """
    n = count_tokens(counter, text)
    if n == 0:
        return 0
    return math.ceil(n * counter.safety_margin - 1e-9)


def apply_margin(counter: TokenCounter, raw_count: int) -> int:
    """Budgeted equivalent of an already-known raw count."""
    if raw_count <= 0:
        return 0
    return math.ceil(raw_count * counter.safety_margin - 1e-9)


def truncate_to_budget(counter: TokenCounter, text: str, max_budgeted: int) -> str:
    """Longest prefix of ``text`` whose budgeted count fits ``max_budgeted``.

    Token counts are monotone over prefixes, so binary search applies.
    """
    if max_budgeted <= 0:
        return ""
    if budgeted_count(counter, text) <= max_budgeted:
        return text
    lo, hi = 0, len(text)  # invariant: prefix of length lo fits, hi does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if budgeted_count(counter, text[:mid]) <= max_budgeted:
            lo = mid
        else:
            hi = mid
    return text[:lo].rstrip()
