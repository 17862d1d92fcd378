"""QA answer metrics: exact match, BLEU-1, ROUGE-L, and CIDEr.

Tokenization is lowercase alphanumeric words throughout; exact match
additionally drops leading articles. CIDEr follows the standard TF-IDF
n-gram (n = 1..4) formulation with document frequencies taken from the
evaluated gold corpus.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Sequence

_ARTICLES = ("a", "an", "the")
CIDER_MAX_N = 4
CIDER_SIGMA = 6.0
ROUGE_BETA = 1.2


def tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop leading articles."""
    tokens = tokenize(text)
    while tokens and tokens[0] in _ARTICLES:
        tokens.pop(0)
    return " ".join(tokens)


def exact_match(pred: str, gold_answers: Sequence[str]) -> int:
    if not pred.strip():
        return 0
    normalized = normalize_answer(pred)
    return int(any(normalized == normalize_answer(g) for g in gold_answers))


def bleu1(pred: str, gold_answers: Sequence[str]) -> float:
    """Max over golds of clipped unigram precision times brevity penalty."""
    pred_tokens = tokenize(pred)
    if not pred_tokens:
        return 0.0
    pred_counts = Counter(pred_tokens)
    best = 0.0
    for gold in gold_answers:
        gold_counts = Counter(tokenize(gold))
        if not gold_counts:
            continue
        clipped = sum(
            min(count, gold_counts[token]) for token, count in pred_counts.items()
        )
        precision = clipped / len(pred_tokens)
        c, r = len(pred_tokens), sum(gold_counts.values())
        penalty = 1.0 if c > r else math.exp(1.0 - r / c)
        best = max(best, precision * penalty)
    return best


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(pred: str, gold_answers: Sequence[str]) -> float:
    """Max over golds of the LCS F-measure with beta = 1.2."""
    pred_tokens = tokenize(pred)
    if not pred_tokens:
        return 0.0
    best = 0.0
    beta_sq = ROUGE_BETA**2
    for gold in gold_answers:
        gold_tokens = tokenize(gold)
        if not gold_tokens:
            continue
        lcs = _lcs_length(pred_tokens, gold_tokens)
        if lcs == 0:
            continue
        precision = lcs / len(pred_tokens)
        recall = lcs / len(gold_tokens)
        score = (1 + beta_sq) * recall * precision / (recall + beta_sq * precision)
        best = max(best, score)
    return best


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _cider_vector(
    tokens: list[str], document_frequency: Counter, log_ref_len: float
) -> tuple[list[dict], list[float]]:
    vectors = []
    norms = []
    for n in range(1, CIDER_MAX_N + 1):
        vec = {}
        for ngram, count in _ngram_counts(tokens, n).items():
            idf = log_ref_len - math.log(max(1.0, document_frequency[ngram]))
            vec[ngram] = count * idf
        vectors.append(vec)
        norms.append(math.sqrt(sum(v * v for v in vec.values())))
    return vectors, norms


def _cider_similarity(
    pred_tokens: list[str],
    gold_tokens: list[str],
    pred_vec: list[dict],
    pred_norm: list[float],
    gold_vec: list[dict],
    gold_norm: list[float],
) -> list[float]:
    delta = float(len(pred_tokens) - len(gold_tokens))
    penalty = math.exp(-(delta**2) / (2 * CIDER_SIGMA**2))
    values = []
    for n in range(CIDER_MAX_N):
        total = sum(
            min(value, gold_vec[n].get(ngram, 0.0)) * gold_vec[n].get(ngram, 0.0)
            for ngram, value in pred_vec[n].items()
        )
        if pred_norm[n] != 0.0 and gold_norm[n] != 0.0:
            total /= pred_norm[n] * gold_norm[n]
        else:
            total = 0.0
        values.append(total * penalty)
    return values


def cider_scores(
    preds: Sequence[str],
    golds: Sequence[Sequence[str]],
    corpus: Iterable[Sequence[str]] | None = None,
) -> list[float]:
    """Per-item CIDEr scores; IDF statistics come from the gold corpus."""
    if len(preds) != len(golds):
        raise ValueError("preds and golds must have equal length")
    corpus_golds = list(corpus) if corpus is not None else list(golds)
    document_frequency: Counter = Counter()
    for refs in corpus_golds:
        seen: set = set()
        for ref in refs:
            tokens = tokenize(ref)
            for n in range(1, CIDER_MAX_N + 1):
                seen.update(_ngram_counts(tokens, n).keys())
        document_frequency.update(seen)
    count = len(corpus_golds)
    # A single-document corpus would zero every IDF weight; floor the
    # reference length at 1 so identical pred/gold still scores maximal.
    log_ref_len = math.log(count) if count > 1 else 1.0

    scores = []
    for pred, refs in zip(preds, golds):
        pred_tokens = tokenize(pred)
        if not pred_tokens or not refs:
            scores.append(0.0)
            continue
        pred_vec, pred_norm = _cider_vector(pred_tokens, document_frequency, log_ref_len)
        per_ref = []
        for ref in refs:
            gold_tokens = tokenize(ref)
            gold_vec, gold_norm = _cider_vector(gold_tokens, document_frequency, log_ref_len)
            values = _cider_similarity(
                pred_tokens, gold_tokens, pred_vec, pred_norm, gold_vec, gold_norm
            )
            per_ref.append(sum(values) / CIDER_MAX_N)
        scores.append(10.0 * sum(per_ref) / len(per_ref))
    return scores


def cider(
    preds: Sequence[str],
    golds: Sequence[Sequence[str]],
    corpus: Iterable[Sequence[str]] | None = None,
) -> float:
    """Corpus-level CIDEr: mean of per-item scores."""
    if not preds:
        return 0.0
    scores = cider_scores(preds, golds, corpus)
    return sum(scores) / len(scores)
