"""Deterministic in-process mock backends.

These stand in for the four model services during tests and demos. Every
mock is a pure function of the request: the same request always yields a
byte-identical response, and all of them are safe under concurrent calls.

Mocks are reachable through ``mock://`` endpoint URLs:

* ``mock://echo[?text=...]`` - completion; copies the query input back out of
  the prompt (or always returns the canned ``text``).
* ``mock://lexicon-flip[?plant=seed]`` - completion; candidate 1 is the input
  with sentiment words swapped by the antonym table below, followed by a
  verbatim copy and progressively padded copies. ``plant=seed`` moves the
  flipped candidate to beam position ``seed % k``.
* ``mock://uniform[?vocab=50257]`` - token scoring; every whitespace token
  gets log(1/vocab).
* ``mock://sentiment`` - mask filling; a word-list sentiment rule over the
  bracketed cloze text (or the whole text when it is not a cloze).
* ``mock://hash-embed[?dim=32]`` - embeddings; a unit vector seeded from a
  hash of each whitespace token.
"""

from __future__ import annotations

import hashlib
import math
import re
from functools import lru_cache
from urllib.parse import parse_qs, urlsplit

import numpy as np

from .backends import (
    BackendError,
    CompletionRequest,
    CompletionResponse,
    EmbeddingResponse,
    Generation,
    LabelError,
    MaskFillResponse,
    TokenScore,
    TokenScoreResponse,
)
from .prompts import DELIMITERS

# Antonym pairs used by the flip mock, mirrored into the word lists the
# sentiment mock scores with. Kept small and public so tests can hand-check.
ANTONYMS = {
    "good": "bad",
    "great": "terrible",
    "best": "worst",
    "love": "hate",
    "loved": "hated",
    "wonderful": "horrible",
    "amazing": "awful",
    "delicious": "disgusting",
    "fresh": "stale",
    "friendly": "rude",
    "clean": "dirty",
    "happy": "sad",
    "excellent": "poor",
    "tasty": "bland",
    "nice": "nasty",
}
POSITIVE_WORDS = frozenset(ANTONYMS)
NEGATIVE_WORDS = frozenset(ANTONYMS.values())
_FLIP = {**ANTONYMS, **{v: k for k, v in ANTONYMS.items()}}

# Longest openers first so e.g. "<<<" wins over "<" and '> "' over '"'.
_OPENERS = sorted((pair.open for pair in DELIMITERS.values()),
                  key=len, reverse=True)
_CLOSE_FOR_OPEN = {pair.open: pair.close for pair in DELIMITERS.values()}


def parse_prompt_input(prompt: str, stop: str | None = None):
    """Recover (input_text, open, close) from a rendered transfer prompt.

    Relies on the rendering invariant that the prompt ends with the opening
    marker of a builtin delimiter pair; the query input is the last delimited
    block before that generation slot. Returns None when the prompt does not
    look like one of ours.
    """
    open_ = next((o for o in _OPENERS if prompt.endswith(o)), None)
    if open_ is None:
        return None
    close = stop if stop is not None else _CLOSE_FOR_OPEN[open_]
    stripped = prompt[: -len(open_)]
    if open_ == close:
        positions = [m.start() for m in re.finditer(re.escape(open_), stripped)]
        if len(positions) < 2:
            return None
        start, end = positions[-2] + len(open_), positions[-1]
    else:
        at = stripped.rfind(open_)
        if at < 0:
            return None
        start = at + len(open_)
        end = stripped.find(close, start)
        if end < 0:
            return None
    return stripped[start:end], open_, close


def antonym_flip(text: str) -> str:
    """Swap every known sentiment word for its antonym, keeping capitalization."""

    def repl(match: re.Match) -> str:
        word = match.group(0)
        swapped = _FLIP.get(word.lower())
        if swapped is None:
            return word
        return swapped.capitalize() if word[0].isupper() else swapped

    return re.sub(r"[A-Za-z']+", repl, text)


def _beam_scores(k: int) -> list[float]:
    return [-0.5 - 0.1 * i for i in range(k)]


class EchoCompletionBackend:
    """Returns the prompt's own query input (or a canned string) k times."""

    def __init__(self, canned: str | None = None):
        self.canned = canned

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        if self.canned is not None:
            texts = [self.canned] * req.num_candidates
        else:
            parsed = parse_prompt_input(req.prompt, req.stop)
            if parsed is None:
                texts = [""] * req.num_candidates
            else:
                text, _, close = parsed
                texts = [text + close] * req.num_candidates
        scores = _beam_scores(req.num_candidates)
        return CompletionResponse(tuple(
            Generation(text=t, gen_score=s) for t, s in zip(texts, scores)
        ))


class LexiconFlipBackend:
    """Candidate pool with exactly one sentiment-flipped rewrite.

    The pool is, in pattern order: the antonym-flipped input, a verbatim
    copy, then copies with the last word repeated once more per extra slot
    (strictly longer, so they never win on fluency). With ``plant="first"``
    the flipped candidate always holds the top beam position; with
    ``plant="seed"`` it sits at position ``req.seed % k``, letting tests
    control how often the top-beam baseline happens to pick it.
    """

    def __init__(self, plant: str = "first"):
        if plant not in ("first", "seed"):
            raise ValueError("plant must be 'first' or 'seed'")
        self.plant = plant

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        parsed = parse_prompt_input(req.prompt, req.stop)
        k = req.num_candidates
        if parsed is None:
            return CompletionResponse(tuple(
                Generation(text="", gen_score=s) for s in _beam_scores(k)
            ))
        text, _, close = parsed
        words = text.split()
        patterns = [antonym_flip(text), text]
        for extra in range(1, max(0, k - 2) + 1):
            patterns.append(" ".join(words + [words[-1]] * extra) if words else text)
        patterns = patterns[:k]

        flip_at = 0
        if self.plant == "seed" and k > 0:
            flip_at = (req.seed or 0) % k
        rest = patterns[1:]
        ordered = rest[:flip_at] + [patterns[0]] + rest[flip_at:]

        scores = _beam_scores(k)
        return CompletionResponse(tuple(
            Generation(text=p + close, gen_score=s)
            for p, s in zip(ordered, scores)
        ))


class UniformScoreBackend:
    """Every whitespace token scores log(1/vocab_size)."""

    def __init__(self, vocab_size: int = 50257):
        if vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        self.vocab_size = vocab_size

    def score_tokens(self, text: str) -> TokenScoreResponse:
        logprob = -math.log(self.vocab_size)
        return TokenScoreResponse(tuple(
            TokenScore(token=tok, logprob=logprob) for tok in text.split()
        ))


class SentimentMaskBackend:
    """Word-list sentiment rule producing raw label likelihoods.

    Counts positive/negative lexicon words in the text (the bracketed part
    when the input is a cloze statement). More positive words give
    {positive: 0.9, negative: 0.1}, more negative words the reverse, and a
    tie gives 0.5/0.5. Labels outside the vocabulary, or containing
    whitespace, are rejected per-label.
    """

    KNOWN_LABELS = frozenset({"positive", "negative"})
    _CLOZE = re.compile(r"^The following text is .+?: \[(.*)\]\.$", re.DOTALL)

    def fill_mask(self, text: str, labels: list[str]) -> MaskFillResponse:
        label_errors = {}
        for label in labels:
            if not label.strip() or " " in label.strip():
                label_errors[label] = "label not single-token"
            elif label not in self.KNOWN_LABELS:
                label_errors[label] = "label not in backend vocabulary"
        if label_errors:
            raise LabelError(label_errors)

        match = self._CLOZE.match(text)
        inner = match.group(1) if match else text
        words = [w.lower() for w in re.findall(r"[A-Za-z']+", inner)]
        pos = sum(w in POSITIVE_WORDS for w in words)
        neg = sum(w in NEGATIVE_WORDS for w in words)
        if pos > neg:
            table = {"positive": 0.9, "negative": 0.1}
        elif neg > pos:
            table = {"positive": 0.1, "negative": 0.9}
        else:
            table = {"positive": 0.5, "negative": 0.5}
        return MaskFillResponse({label: table[label] for label in labels})


class HashEmbedBackend:
    """Unit embedding per token, seeded from a hash of the token string."""

    def __init__(self, dim: int = 32):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim

    def _vector(self, token: str) -> tuple[float, ...]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        return tuple(float(v) for v in vec)

    def embed_tokens(self, text: str) -> EmbeddingResponse:
        vectors = tuple(self._vector(tok) for tok in text.split())
        return EmbeddingResponse(vectors=vectors, dim=self.dim)


class StaticMaskBackend:
    """Fixed raw likelihood table, for hand-built scoring scenarios in tests."""

    def __init__(self, table: dict[str, float]):
        self.table = dict(table)

    def fill_mask(self, text: str, labels: list[str]) -> MaskFillResponse:
        return MaskFillResponse({label: self.table.get(label, 0.0)
                                 for label in labels})


class FixedEmbedBackend:
    """Embeds each whitespace token via an explicit token -> vector table."""

    def __init__(self, table: dict[str, tuple[float, ...]]):
        if not table:
            raise ValueError("embedding table must be non-empty")
        dims = {len(v) for v in table.values()}
        if len(dims) != 1:
            raise ValueError("all table vectors must share one dim")
        self.table = {k: tuple(float(x) for x in v) for k, v in table.items()}
        self.dim = dims.pop()

    def embed_tokens(self, text: str) -> EmbeddingResponse:
        try:
            vectors = tuple(self.table[tok] for tok in text.split())
        except KeyError as exc:
            raise BackendError(f"token {exc.args[0]!r} not in embedding table")
        return EmbeddingResponse(vectors=vectors, dim=self.dim)


def _param(params: dict, name: str, default=None):
    values = params.get(name)
    return values[0] if values else default


@lru_cache(maxsize=None)
def resolve_mock_url(url: str):
    """Instantiate the mock named by a ``mock://`` URL (cached per URL)."""
    parts = urlsplit(url)
    name = parts.netloc
    params = parse_qs(parts.query)
    if name == "echo":
        return EchoCompletionBackend(canned=_param(params, "text"))
    if name == "lexicon-flip":
        return LexiconFlipBackend(plant=_param(params, "plant", "first"))
    if name == "uniform":
        return UniformScoreBackend(vocab_size=int(_param(params, "vocab", "50257")))
    if name == "sentiment":
        return SentimentMaskBackend()
    if name == "hash-embed":
        return HashEmbedBackend(dim=int(_param(params, "dim", "32")))
    raise ValueError(f"unknown mock backend {url!r}")


def mock_endpoints(plant: str = "first", vocab: int = 50257,
                   dim: int = 32, **overrides):
    """A BackendEndpoints wired to the standard sentiment mock suite."""
    from .backends import BackendEndpoints

    fields = {
        "complete": f"mock://lexicon-flip?plant={plant}",
        "score": f"mock://uniform?vocab={vocab}",
        "fill_mask": "mock://sentiment",
        "embed": f"mock://hash-embed?dim={dim}",
    }
    fields.update(overrides)
    return BackendEndpoints(**fields)
