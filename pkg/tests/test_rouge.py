import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouge import (
    BOS_MARKER,
    MatchState,
    NGram,
    count_match,
    extract_ngrams,
    extract_su4,
    rouge_score,
    tokenize,
)
from grouge.rouge import clipped_matches, grams_for

from oracles import clipped_match_total, su4_pairs


def text_of(*sentences: str):
    return tokenize("\n".join(sentences), stemming=False)


token_lists = st.lists(st.sampled_from("abcdef"), min_size=0, max_size=12)


class TestExtractNgrams:
    def test_unigram_multiset(self):
        ms = extract_ngrams(text_of("a b a"), 1)
        assert ms.count(NGram(("a",))) == 2
        assert ms.count(NGram(("b",))) == 1
        assert ms.total == 3

    def test_bigrams(self):
        ms = extract_ngrams(text_of("a b c"), 2)
        assert ms.count(NGram(("a", "b"))) == 1
        assert ms.count(NGram(("b", "c"))) == 1
        assert ms.total == 2

    def test_sentence_shorter_than_n_contributes_nothing(self):
        ms = extract_ngrams(text_of("a"), 2)
        assert ms.total == 0

    def test_ngrams_do_not_cross_sentence_boundaries(self):
        ms = extract_ngrams(text_of("a b", "c d"), 2)
        assert NGram(("b", "c")) not in ms

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            extract_ngrams(text_of("a"), 0)


class TestExtractSu4:
    def test_three_token_sentence(self):
        ms = extract_su4(text_of("a b c"))
        skip = {("a", "b"), ("a", "c"), ("b", "c")}
        unigram = {(BOS_MARKER, t) for t in "abc"}
        assert {g.terms for g, _ in ms.items()} == skip | unigram
        assert ms.total == 6

    def test_single_token_sentence(self):
        ms = extract_su4(text_of("a"))
        assert [g.terms for g, _ in ms.items()] == [(BOS_MARKER, "a")]

    def test_gap_bound_excludes_distant_pairs(self):
        ms = extract_su4(text_of("a b c d e f"))
        assert NGram(("a", "f"), kind="skip") not in ms
        assert NGram(("a", "e"), kind="skip") in ms

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=5, max_value=30))
    def test_count_formula_for_long_sentences(self, length):
        tokens = [f"t{i}" for i in range(length)]
        ms = extract_su4(text_of(" ".join(tokens)))
        assert ms.total == length + (4 * length - 10)

    @settings(max_examples=100, deadline=None)
    @given(token_lists)
    def test_matches_enumeration_oracle(self, tokens):
        if not tokens:
            return
        ms = extract_su4(text_of(" ".join(tokens)))
        expected = su4_pairs(tokens, BOS_MARKER)
        got = [g.terms for g, count in ms.items() for _ in range(count)]
        assert sorted(got) == sorted(expected)


class TestCountMatch:
    def test_consumption_clips_to_peer_count(self):
        peer = extract_ngrams(text_of("the cat"), 1)
        state = MatchState(peer)
        the = NGram(("the",))
        assert count_match(the, peer, state) == 1
        assert count_match(the, peer, state) == 0

    def test_absent_gram_is_zero(self):
        peer = extract_ngrams(text_of("the cat"), 1)
        state = MatchState(peer)
        assert count_match(NGram(("dog",)), peer, state) == 0

    def test_hand_count_total(self):
        model = extract_ngrams(text_of("the cat sat"), 1)
        peer = extract_ngrams(text_of("the cat ran"), 1)
        state = MatchState(peer)
        total = sum(
            count_match(g, peer, state) for g, c in model.items() for _ in range(c)
        )
        assert total == 2

    @settings(max_examples=200, deadline=None)
    @given(token_lists, token_lists)
    def test_clipping_matches_multiset_intersection_oracle(self, m_tokens, p_tokens):
        model_text = text_of(" ".join(m_tokens) or "placeholder")
        peer_text = text_of(" ".join(p_tokens) or "other")
        model = extract_ngrams(model_text, 1)
        peer = extract_ngrams(peer_text, 1)
        state = MatchState(peer)
        consumed = sum(
            count_match(g, peer, state) for g, c in model.items() for _ in range(c)
        )
        assert consumed == clipped_matches(model, peer)
        assert consumed == clipped_match_total(
            model_text.tokens, peer_text.tokens
        )


class TestRougeScore:
    def test_identical_texts_score_one(self):
        text = text_of("the cat sat on the mat")
        for variant in ("1", "2", "su4"):
            assert rouge_score(text, [text], variant) == 1.0

    def test_hand_case_two_thirds(self):
        peer = text_of("the cat ran")
        model = text_of("the cat sat")
        assert rouge_score(peer, [model], "1") == pytest.approx(2 / 3, abs=0)

    def test_empty_peer_scores_zero(self):
        assert rouge_score(text_of(""), [text_of("the cat")], "1") == 0.0

    def test_requires_models(self):
        with pytest.raises(ValueError):
            rouge_score(text_of("a"), [], "1")

    def test_superset_peer_scores_one(self):
        models = [text_of("a a b"), text_of("c d")]
        peer = text_of("a a b", "c d", "e f g")
        for variant in ("1", "2", "su4"):
            assert rouge_score(peer, models, variant) == 1.0

    def test_multi_model_double_summation(self):
        peer = text_of("a b")
        models = [text_of("a b"), text_of("c d")]
        # 2 + 0 unigram matches over 2 + 2 model unigrams
        assert rouge_score(peer, models, "1") == pytest.approx(0.5, abs=0)

    @settings(max_examples=100, deadline=None)
    @given(token_lists, token_lists, token_lists)
    def test_adding_peer_sentence_never_decreases_recall(self, m, p, extra):
        model = text_of(" ".join(m) or "placeholder")
        peer_small = text_of(" ".join(p))
        peer_big = text_of(" ".join(p), " ".join(extra))
        for variant in ("1", "2", "su4"):
            assert rouge_score(peer_big, [model], variant) >= rouge_score(
                peer_small, [model], variant
            )

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            grams_for(text_of("a"), "3")
