"""Word discrimination AP, Spearman correlation, and word-similarity scoring.

Average precision is non-interpolated with pessimistic tie handling: among
equal scores, different-word pairs are ranked ahead of same-word pairs, so a
perfect score certifies strict separation.  Spearman uses average fractional
ranks and is exact (+1/-1) on monotone inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import CoverageError, DataError, InputError, UndefinedError

__all__ = [
    "ScoredPairSet",
    "cosine",
    "score_all_pairs",
    "average_precision",
    "word_discrimination_ap",
    "spearman",
    "word_similarity_eval",
    "edit_distance_similarity",
]

PAIR_BLOCK = 512


class ScoredPairSet:
    """All segment pairs of one pooled set: cosine scores and same-word flags."""

    def __init__(self, scores, is_same):
        self.scores = np.asarray(scores, dtype=np.float64)
        self.is_same = np.asarray(is_same, dtype=bool)
        if self.scores.shape != self.is_same.shape or self.scores.ndim != 1:
            raise InputError("scores and is_same must be equal-length 1-D arrays")
        self.n_pairs = int(self.scores.shape[0])
        self.n_positive = int(self.is_same.sum())


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise InputError("cosine undefined for a zero vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def score_all_pairs(p) -> ScoredPairSet:
    """Cosine-score every segment pair of a word-kind pooled set, blockwise."""
    if p.kind != "word":
        raise InputError(f"word discrimination needs word-kind input, got {p.kind!r}")
    m = p.m
    if m < 2:
        raise InputError(f"need at least 2 segments, got {m}")
    norms = np.linalg.norm(p.vectors, axis=1)
    if (norms == 0.0).any():
        raise InputError(f"zero vector at row {int(np.flatnonzero(norms == 0.0)[0])}")
    unit = p.vectors / norms[:, None]
    _, label_ids = np.unique(p.labels, return_inverse=True)

    n_pairs = m * (m - 1) // 2
    scores = np.empty(n_pairs)
    is_same = np.empty(n_pairs, dtype=bool)
    out = 0
    for lo in range(0, m, PAIR_BLOCK):
        hi = min(lo + PAIR_BLOCK, m)
        sims = np.clip(unit[lo:hi] @ unit.T, -1.0, 1.0)
        for i in range(lo, hi):
            row = sims[i - lo, i + 1 :]
            scores[out : out + row.shape[0]] = row
            is_same[out : out + row.shape[0]] = label_ids[i + 1 :] == label_ids[i]
            out += row.shape[0]
    return ScoredPairSet(scores, is_same)


def average_precision(pairs: ScoredPairSet) -> float:
    """Non-interpolated AP; tied different-word pairs outrank tied same-word pairs.

    The j-th best same-word pair sits at rank j plus the number of
    different-word pairs scoring >= it, so no full sort of all pairs is
    needed.  Tie order among same-word pairs does not change the sum.
    """
    if pairs.n_positive < 1:
        raise InputError("average precision undefined without a same-word pair")
    pos = np.sort(pairs.scores[pairs.is_same])[::-1]
    neg = np.sort(pairs.scores[~pairs.is_same])
    at_or_above = neg.shape[0] - np.searchsorted(neg, pos, side="left")
    found = np.arange(1, pos.shape[0] + 1)
    return float((found / (found + at_or_above)).mean())


def word_discrimination_ap(p) -> dict:
    """AP over all segment pairs plus the pair counts behind it."""
    pairs = score_all_pairs(p)
    return {
        "ap": average_precision(pairs),
        "n_pairs": pairs.n_pairs,
        "n_positive": pairs.n_positive,
    }


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman's rho: Pearson correlation of average fractional ranks."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("inputs must be equal-length 1-D sequences")
    if x.shape[0] < 2:
        raise InputError(f"need at least 2 observations, got {x.shape[0]}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("inputs contain non-finite values")
    if (x == x[0]).all() or (y == y[0]).all():
        raise UndefinedError("rank correlation undefined for a constant list")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    return float((dx @ dy) / np.sqrt((dx @ dx) * (dy @ dy)))


def word_similarity_eval(emb: dict, bench) -> dict:
    """Spearman of embedding cosines against human judgements, with coverage.

    Pairs whose words are missing from the table are dropped; lookups fall
    back to the lowercase form.  Fewer than 2 covered pairs is a coverage
    error, not a silent zero.
    """

    def lookup(word):
        if word in emb:
            return emb[word]
        return emb.get(word.lower())

    cos_scores, human = [], []
    for a, b, score in bench.pairs:
        va, vb = lookup(a), lookup(b)
        if va is None or vb is None:
            continue
        cos_scores.append(cosine(va, vb))
        human.append(score)
    if len(cos_scores) < 2:
        raise CoverageError(
            f"benchmark {bench.name!r}: {len(cos_scores)} of {len(bench.pairs)} pairs covered"
        )
    return {
        "rho": spearman(cos_scores, human),
        "coverage": len(cos_scores) / len(bench.pairs),
        "n": len(cos_scores),
    }


def edit_distance_similarity(word_a: str, word_b: str) -> float:
    """Negated Levenshtein distance, so larger means more similar."""
    if not word_a or not word_b:
        raise InputError("edit distance needs non-empty strings")
    prev = list(range(len(word_b) + 1))
    for i, ca in enumerate(word_a, start=1):
        cur = [i]
        for j, cb in enumerate(word_b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return float(-prev[-1])
