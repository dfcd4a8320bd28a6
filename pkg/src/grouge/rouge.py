"""N-gram extraction and recall-oriented lexical scoring.

Variants: contiguous unigrams/bigrams and skip-bigrams with maximum gap 4
plus sentence-marker unigram pairs (the SU convention). Matching is
clipped: a gram's matches never exceed the smaller of its model and peer
occurrence counts. Multiple references aggregate by double summation over
(model, gram) occurrences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .text import SummaryText

BOS_MARKER = "<s>"

VARIANTS = ("1", "2", "su4")

CONTIGUOUS = "contiguous"
SKIP = "skip"
UNIGRAM_OF_SU = "unigram-of-su"


@dataclass(frozen=True, slots=True)
class NGram:
    terms: tuple[str, ...]
    kind: str = CONTIGUOUS

    def content_terms(self) -> tuple[str, ...]:
        """Terms excluding the sentence marker."""
        return tuple(t for t in self.terms if t != BOS_MARKER)

    def __str__(self) -> str:
        return " ".join(self.terms)


class NGramMultiset:
    """Occurrence-counted bag of n-grams; iteration order is first-seen."""

    def __init__(self, grams: Iterable[NGram] = ()):
        self.counts: Counter[NGram] = Counter(grams)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, gram: NGram) -> int:
        return self.counts.get(gram, 0)

    def items(self) -> Iterator[tuple[NGram, int]]:
        return iter(self.counts.items())

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, gram: NGram) -> bool:
        return gram in self.counts


def extract_ngrams(text: SummaryText, n: int) -> NGramMultiset:
    """Contiguous n-grams within sentence boundaries."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    grams = []
    for sent in text.sentences:
        for i in range(len(sent) - n + 1):
            grams.append(NGram(tuple(sent[i : i + n])))
    return NGramMultiset(grams)


def extract_su4(text: SummaryText, max_gap: int = 4) -> NGramMultiset:
    """Skip-bigrams with gap <= max_gap plus marker-paired unigrams."""
    grams = []
    for sent in text.sentences:
        for i, token in enumerate(sent):
            grams.append(NGram((BOS_MARKER, token), kind=UNIGRAM_OF_SU))
            for j in range(i + 1, min(i + max_gap, len(sent) - 1) + 1):
                grams.append(NGram((token, sent[j]), kind=SKIP))
    return NGramMultiset(grams)


def grams_for(text: SummaryText, variant: str) -> NGramMultiset:
    if variant == "1":
        return extract_ngrams(text, 1)
    if variant == "2":
        return extract_ngrams(text, 2)
    if variant == "su4":
        return extract_su4(text)
    raise ValueError(f"unknown variant {variant!r}")


class MatchState:
    """Per-pass consumption tracker so clipped matching is occurrence-exact."""

    def __init__(self, peer: NGramMultiset):
        self._remaining = dict(peer.counts)

    def consume(self, gram: NGram) -> int:
        left = self._remaining.get(gram, 0)
        if left > 0:
            self._remaining[gram] = left - 1
            return 1
        return 0


def count_match(gram: NGram, peer: NGramMultiset, state: MatchState) -> int:
    """1 if an unconsumed occurrence of gram remains in the peer, else 0."""
    return state.consume(gram)


def clipped_matches(model: NGramMultiset, peer: NGramMultiset) -> int:
    """Total clipped matches: sum over grams of min(model, peer) counts."""
    return sum(min(c, peer.count(g)) for g, c in model.items())


def rouge_score(peer: SummaryText, models: list[SummaryText], variant: str) -> float:
    """Recall over all models: matched grams / total model grams."""
    if not models:
        raise ValueError("at least one model summary is required")
    peer_grams = grams_for(peer, variant)
    matched = 0
    total = 0
    for model in models:
        model_grams = grams_for(model, variant)
        matched += clipped_matches(model_grams, peer_grams)
        total += model_grams.total
    return matched / total if total else 0.0
