"""Candidate scoring and selection.

Each candidate rewrite is scored by three probability factors, combined in
log space:

* similarity: greedy-matching F1 over pairwise cosine similarities of
  contextual token embeddings of the source and the candidate,
* strength: the probability that the candidate carries the target style,
  estimated from masked-LM cloze likelihoods over the two style words and
  l1-normalized,
* fluency: the candidate's total log-probability under a language model
  (optional; it penalizes long or rare-word texts, so a no-fluency variant
  is provided).

The winner is the candidate with the highest composite. The top-beam
baseline instead takes the candidate the generator itself ranked first.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backends
from .backends import BackendEndpoints
from .prompts import StyleLabel, TransferRequest, render_cloze

# Probability floor applied to the similarity and strength factors before
# taking logs; keeps composites finite without moving any non-degenerate
# argmax. The fluency term is already a (finite) log-probability.
PROB_FLOOR = 1e-9

STRENGTH_SOURCES = ("mlm_cloze", "external_classifier")


@dataclass(frozen=True)
class Candidate:
    """One extracted rewrite within a candidate pool."""

    text: str
    gen_score: float
    index: int
    unterminated: bool = False


@dataclass(frozen=True)
class RerankConfig:
    k: int = 3
    use_fluency: bool = True
    strength_source: str = "mlm_cloze"
    endpoints: BackendEndpoints = BackendEndpoints()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.strength_source not in STRENGTH_SOURCES:
            raise ValueError(
                f"strength_source must be one of {STRENGTH_SOURCES}"
            )


@dataclass(frozen=True)
class RerankScore:
    """The log factors of one candidate; composite sums the enabled terms."""

    log_similarity: float
    log_strength: float
    log_fluency: float | None
    composite: float

    def to_dict(self) -> dict:
        return {
            "log_similarity": self.log_similarity,
            "log_strength": self.log_strength,
            "log_fluency": self.log_fluency,
            "composite": self.composite,
        }


def similarity_score(src: str, cand: str, endpoints: BackendEndpoints) -> float:
    """Greedy-matching F1 over token embedding cosine similarities, in (0, 1].

    Recall matches each source token to its most similar candidate token,
    precision the reverse, and the harmonic mean combines them. The function
    is symmetric in its two texts, and identical texts score 1.0 under any
    embedding backend.
    """
    if not src.strip() or not cand.strip():
        raise ValueError("similarity_score requires two non-empty texts")
    src_vecs = _unit_rows(backends.embed_tokens(endpoints, src))
    cand_vecs = _unit_rows(backends.embed_tokens(endpoints, cand))
    sim = src_vecs @ cand_vecs.T
    recall = float(sim.max(axis=1).mean())
    precision = float(sim.max(axis=0).mean())
    if precision + recall <= 0:
        return PROB_FLOOR
    f1 = 2 * precision * recall / (precision + recall)
    return min(max(f1, PROB_FLOOR), 1.0)


def _unit_rows(resp: backends.EmbeddingResponse) -> np.ndarray:
    mat = np.asarray(resp.vectors, dtype=np.float64)
    return mat / np.linalg.norm(mat, axis=1, keepdims=True)


def _l1_normalize(raw_source: float, raw_target: float) -> float:
    total = raw_source + raw_target
    if total == 0:
        return 0.5
    return raw_target / total


def style_strength(cand: str, s1: StyleLabel, s2: StyleLabel,
                   endpoints: BackendEndpoints) -> float:
    """Probability in [0, 1] that the text carries style s2 rather than s1.

    The text is wrapped in the cloze statement, the masked-LM is queried for
    the raw likelihoods of the two style words at the mask position, and the
    pair is l1-normalized. When both raw likelihoods are zero the result is
    the indifferent 0.5.
    """
    if s1.name == s2.name and s1.negated == s2.negated:
        raise ValueError("style_strength needs two distinct styles")
    cloze = render_cloze(cand, endpoints.mask_token)
    labels = [s1.render(), s2.render()]
    resp = backends.fill_mask(endpoints, cloze, labels)
    return _l1_normalize(resp.scores[labels[0]], resp.scores[labels[1]])


def classifier_strength(cand: str, s1: StyleLabel, s2: StyleLabel,
                        endpoints: BackendEndpoints) -> float:
    """Like style_strength, but from a trained classifier endpoint."""
    labels = [s1.render(), s2.render()]
    resp = backends.classify(endpoints, cand, labels)
    return _l1_normalize(resp.scores[labels[0]], resp.scores[labels[1]])


def fluency_logprob(cand: str, endpoints: BackendEndpoints) -> float:
    """Total log-probability of the text: the sum of per-token conditionals."""
    if not cand.strip():
        raise ValueError("fluency_logprob requires a non-empty text")
    resp = backends.score_tokens(endpoints, cand)
    return resp.total_logprob


def _floored_log(p: float) -> float:
    return math.log(max(p, PROB_FLOOR))


def score_candidate(req: TransferRequest, cand: Candidate,
                    cfg: RerankConfig) -> RerankScore:
    """All enabled log factors for one candidate."""
    sim = similarity_score(req.input_text, cand.text, cfg.endpoints)
    if cfg.strength_source == "external_classifier":
        strength = classifier_strength(cand.text, req.source_style,
                                       req.target_style, cfg.endpoints)
    else:
        strength = style_strength(cand.text, req.source_style,
                                  req.target_style, cfg.endpoints)
    log_sim = _floored_log(sim)
    log_strength = _floored_log(strength)
    log_fluency = None
    composite = log_sim + log_strength
    if cfg.use_fluency:
        log_fluency = fluency_logprob(cand.text, cfg.endpoints)
        composite += log_fluency
    return RerankScore(log_similarity=log_sim, log_strength=log_strength,
                       log_fluency=log_fluency, composite=composite)


def rerank(req: TransferRequest, pool: list[Candidate], cfg: RerankConfig,
           jobs: int = 1) -> tuple[Candidate, list[RerankScore]]:
    """Score every candidate and pick the composite argmax.

    Ties break toward the lowest pool index. ``jobs`` bounds concurrent
    per-candidate scoring; the fold over scores itself is sequential and
    order-stable.
    """
    if not pool:
        raise ValueError("rerank requires a non-empty candidate pool")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            scores = list(pool_exec.map(
                lambda c: score_candidate(req, c, cfg), pool))
    else:
        scores = [score_candidate(req, c, cfg) for c in pool]
    best = 0
    for i in range(1, len(pool)):
        if scores[i].composite > scores[best].composite:
            best = i
    return pool[best], scores


def top_beam_baseline(pool: list[Candidate]) -> Candidate:
    """The candidate the generator ranked highest, ties to the lowest index."""
    if not pool:
        raise ValueError("top_beam_baseline requires a non-empty pool")
    best = 0
    for i in range(1, len(pool)):
        if pool[i].gen_score > pool[best].gen_score:
            best = i
    return pool[best]


def score_record(pool: list[Candidate], scores: list[RerankScore],
                 winner: Candidate, baseline: Candidate) -> dict:
    """The per-example score record consumed by the run manifest writer."""
    return {
        "candidates": [
            {"index": c.index, "text": c.text, "gen_score": c.gen_score,
             "unterminated": c.unterminated}
            for c in pool
        ],
        "scores": [s.to_dict() for s in scores],
        "winner_index": winner.index,
        "baseline_index": baseline.index,
    }
