import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attnoie.beam_search import (
    IndexOutOfRange,
    association,
    beam_search_pair,
    extract_sentence,
)
from attnoie.model import ChunkSpan, ExtractionConfig, SentenceBundle, WordAttentionMatrix

from oracles import exhaustive_best_norm


def bundle_of(words, chunks, sentence_id="s"):
    return SentenceBundle(
        sentence_id=sentence_id,
        words=tuple(words),
        subword_map=tuple((i, i, 1) for i in range(len(words))),
        np_chunks=tuple(chunks),
        attention_ref=sentence_id,
    )


def birth_sentence_fixture():
    words = ["Dylan", "was", "born", "in", "Minnesota"]
    values = np.full((5, 5), 0.01)
    np.fill_diagonal(values, 0.0)
    for i, j, v in [(0, 2, 0.2), (2, 3, 0.3), (3, 4, 0.2)]:
        values[i, j] = values[j, i] = v
    bundle = bundle_of(words, [ChunkSpan(0, 1, "Dylan"), ChunkSpan(4, 5, "Minnesota")])
    return bundle, WordAttentionMatrix(values)


class TestAssociation:
    def test_symmetric_matrix(self):
        m = WordAttentionMatrix([[0.1, 0.2], [0.2, 0.3]])
        assert association(m, 0, 1) == pytest.approx(0.2)

    def test_causal_matrix_uses_max(self):
        values = np.zeros((4, 4))
        values[3, 1] = 0.4
        m = WordAttentionMatrix(values)
        assert association(m, 1, 3) == pytest.approx(0.4)
        assert association(m, 3, 1) == pytest.approx(0.4)

    def test_diagonal(self):
        m = WordAttentionMatrix([[0.7, 0.0], [0.0, 0.1]])
        assert association(m, 0, 0) == pytest.approx(0.7)

    def test_out_of_range(self):
        m = WordAttentionMatrix([[0.0]])
        with pytest.raises(IndexOutOfRange):
            association(m, 0, 1)


class TestBeamSearchPair:
    def test_birth_sentence_beam_size_one(self):
        bundle, matrix = birth_sentence_fixture()
        config = ExtractionConfig(beam_size=1, min_predicate_frequency=1)
        out = beam_search_pair(bundle, matrix, bundle.np_chunks[0], bundle.np_chunks[1], config)
        assert len(out) == 1
        ext = out[0]
        assert ext.triple() == ("Dylan", "born in", "Minnesota")
        assert ext.raw_score == pytest.approx(0.7, abs=1e-9)
        assert ext.norm_score == pytest.approx(0.7 / 3)
        assert ext.direction == "L2R"

    def test_adjacent_chunks_empty_without_empty_predicates(self):
        bundle = bundle_of(["a", "b"], [ChunkSpan(0, 1, "a"), ChunkSpan(1, 2, "b")])
        matrix = WordAttentionMatrix(np.ones((2, 2)))
        config = ExtractionConfig(beam_size=4, min_predicate_frequency=1)
        assert beam_search_pair(bundle, matrix, *bundle.np_chunks, config) == []

    def test_adjacent_chunks_with_empty_predicate_allowed(self):
        bundle = bundle_of(["a", "b"], [ChunkSpan(0, 1, "a"), ChunkSpan(1, 2, "b")])
        matrix = WordAttentionMatrix([[0.0, 0.4], [0.1, 0.0]])
        config = ExtractionConfig(
            beam_size=4, min_predicate_frequency=1, allow_empty_predicate=True
        )
        out = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
        assert len(out) == 1
        assert out[0].predicate_words == ()
        assert out[0].raw_score == pytest.approx(0.4)
        assert out[0].norm_score == pytest.approx(0.4)

    def test_random_matrix_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(42)
        config = ExtractionConfig(beam_size=64, min_predicate_frequency=1)
        for _ in range(50):
            values = rng.random((6, 6))
            matrix = WordAttentionMatrix(values)
            bundle = bundle_of(
                list("abcdef"), [ChunkSpan(0, 1, "a"), ChunkSpan(5, 6, "f")]
            )
            out = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
            oracle = exhaustive_best_norm(values, (0, 1), (5, 6))
            assert out, "some path always exists"
            assert max(e.norm_score for e in out) == oracle

    def test_multi_word_chunks_anchor_on_near_boundary(self):
        words = ["the", "big", "dog", "bit", "the", "mailman"]
        values = np.full((6, 6), 0.01)
        values[2, 3] = values[3, 2] = 0.5
        values[3, 4] = values[4, 3] = 0.5
        matrix = WordAttentionMatrix(values)
        bundle = bundle_of(
            words, [ChunkSpan(0, 3, "the big dog"), ChunkSpan(4, 6, "the mailman")]
        )
        config = ExtractionConfig(beam_size=2, min_predicate_frequency=1)
        out = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
        best = out[0]
        # path runs from the last word of arg0 to the first word of arg1
        assert best.predicate_words == ((3, "bit"),)
        assert best.raw_score == pytest.approx(1.0)

    def test_right_to_left_direction(self):
        words = ["In", "Minnesota", ",", "Dylan", "was", "born"]
        values = np.full((6, 6), 0.01)
        values[3, 2] = values[2, 3] = 0.3  # Dylan -> ,
        values[2, 1] = values[1, 2] = 0.3  # , -> Minnesota
        matrix = WordAttentionMatrix(values)
        arg0 = ChunkSpan(3, 4, "Dylan")
        arg1 = ChunkSpan(1, 2, "Minnesota")
        bundle = bundle_of(words, [arg1, arg0])
        config = ExtractionConfig(beam_size=4, min_predicate_frequency=1)
        out = beam_search_pair(bundle, matrix, arg0, arg1, config)
        assert out
        best = out[0]
        assert best.direction == "R2L"
        assert best.arg0.surface == "Dylan"
        assert best.arg1.surface == "Minnesota"
        # traversal order: indices strictly decreasing
        idx = best.predicate_indices
        assert all(b < a for a, b in zip(idx, idx[1:]))

    def test_gap_larger_than_max_gap_is_skipped(self):
        words = [f"w{i}" for i in range(10)]
        bundle = bundle_of(words, [ChunkSpan(0, 1, "w0"), ChunkSpan(9, 10, "w9")])
        matrix = WordAttentionMatrix(np.ones((10, 10)))
        config = ExtractionConfig(beam_size=2, min_predicate_frequency=1, max_gap=3)
        assert beam_search_pair(bundle, matrix, *bundle.np_chunks, config) == []

    def test_overlapping_spans_rejected(self):
        bundle = bundle_of(["a", "b", "c"], [])
        matrix = WordAttentionMatrix(np.ones((3, 3)))
        config = ExtractionConfig(min_predicate_frequency=1)
        with pytest.raises(ValueError):
            beam_search_pair(
                bundle, matrix, ChunkSpan(0, 2, "a b"), ChunkSpan(1, 3, "b c"), config
            )

    def test_deterministic_output(self):
        rng = np.random.default_rng(3)
        values = rng.random((8, 8))
        matrix = WordAttentionMatrix(values)
        bundle = bundle_of(
            [f"w{i}" for i in range(8)],
            [ChunkSpan(0, 1, "w0"), ChunkSpan(7, 8, "w7")],
        )
        config = ExtractionConfig(beam_size=3, min_predicate_frequency=1)
        first = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
        second = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
        assert first == second

    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    @settings(max_examples=60, deadline=None)
    def test_direction_symmetry(self, seed, n):
        """Reversing words and spans maps L2R output onto R2L with equal scores."""
        rng = np.random.default_rng(seed)
        values = rng.random((n, n))
        a_end = rng.integers(1, n)
        b_start = rng.integers(a_end, n)
        if b_start < a_end:
            return
        arg_a = ChunkSpan(0, int(a_end), "A")
        arg_b = ChunkSpan(int(b_start), n, "B")
        if arg_a.overlaps(arg_b):
            return
        words = [f"w{i}" for i in range(n)]
        config = ExtractionConfig(beam_size=8, min_predicate_frequency=1)

        bundle = bundle_of(words, [])
        fwd = beam_search_pair(bundle, WordAttentionMatrix(values), arg_a, arg_b, config)

        rev_values = values[::-1, ::-1].copy()
        rev_words = words[::-1]
        rev_a = ChunkSpan(n - arg_a.end, n - arg_a.start, "A")
        rev_b = ChunkSpan(n - arg_b.end, n - arg_b.start, "B")
        rev_bundle = bundle_of(rev_words, [])
        bwd = beam_search_pair(
            rev_bundle, WordAttentionMatrix(rev_values), rev_a, rev_b, config
        )

        fwd_scores = sorted(round(e.raw_score, 12) for e in fwd)
        bwd_scores = sorted(round(e.raw_score, 12) for e in bwd)
        assert fwd_scores == bwd_scores
        fwd_paths = sorted(tuple(n - 1 - i for i in e.predicate_indices) for e in fwd)
        bwd_paths = sorted(e.predicate_indices for e in bwd)
        assert fwd_paths == bwd_paths

    def test_increasing_k_to_exhaustive_never_loses_score(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            n = int(rng.integers(3, 8))
            values = rng.random((n, n))
            matrix = WordAttentionMatrix(values)
            bundle = bundle_of(
                [f"w{i}" for i in range(n)],
                [ChunkSpan(0, 1, "w0"), ChunkSpan(n - 1, n, f"w{n-1}")],
            )
            small_k = int(rng.integers(1, 4))
            big_k = 2 ** (n - 2)
            small = beam_search_pair(
                bundle, matrix, *bundle.np_chunks,
                ExtractionConfig(beam_size=small_k, min_predicate_frequency=1),
            )
            big = beam_search_pair(
                bundle, matrix, *bundle.np_chunks,
                ExtractionConfig(beam_size=max(big_k, small_k), min_predicate_frequency=1),
            )
            if small:
                assert max(e.norm_score for e in big) >= max(e.norm_score for e in small)

    def test_cost_bound_on_expansions(self):
        # expansions per pair stay within k * gap * n
        n, k = 10, 4
        rng = np.random.default_rng(5)
        values = rng.random((n, n))
        counter = {"n": 0}

        class CountingMatrix(WordAttentionMatrix):
            pass

        matrix = CountingMatrix(values)
        bundle = bundle_of(
            [f"w{i}" for i in range(n)],
            [ChunkSpan(0, 1, "w0"), ChunkSpan(n - 1, n, f"w{n-1}")],
        )
        config = ExtractionConfig(beam_size=k, min_predicate_frequency=1)
        out = beam_search_pair(bundle, matrix, *bundle.np_chunks, config)
        gap = n - 2
        # every candidate path has at most gap interior words; the number of
        # completed candidates is bounded by k per step over <= gap+1 steps
        assert len(out) <= k * (gap + 1)


class TestExtractSentence:
    def test_extended_sentence_contains_both_triples(self):
        words = [
            "Dylan", "was", "born", "in", "Minnesota", ",",
            "and", "was", "awarded", "Nobel", "Prize",
        ]
        values = np.full((11, 11), 0.01)
        np.fill_diagonal(values, 0.0)
        for i, j, v in [(0, 2, 0.2), (2, 3, 0.3), (3, 4, 0.2), (0, 8, 0.25), (8, 9, 0.3)]:
            values[i, j] = values[j, i] = v
        bundle = bundle_of(
            words,
            [
                ChunkSpan(0, 1, "Dylan"),
                ChunkSpan(4, 5, "Minnesota"),
                ChunkSpan(9, 11, "Nobel Prize"),
            ],
        )
        config = ExtractionConfig(beam_size=6, min_predicate_frequency=1)
        out = extract_sentence(bundle, WordAttentionMatrix(values), config)
        triples = {e.triple() for e in out}
        assert ("Dylan", "born in", "Minnesota") in triples
        assert ("Dylan", "awarded", "Nobel Prize") in triples

    def test_single_chunk_sentence_yields_nothing(self):
        bundle = bundle_of(["a", "b"], [ChunkSpan(0, 1, "a")])
        matrix = WordAttentionMatrix(np.ones((2, 2)))
        assert extract_sentence(bundle, matrix, ExtractionConfig(min_predicate_frequency=1)) == []

    def test_threshold_above_all_scores_filters_everything(self):
        bundle, matrix = birth_sentence_fixture()
        config = ExtractionConfig(
            beam_size=6, min_predicate_frequency=1, score_threshold=10.0
        )
        assert extract_sentence(bundle, matrix, config) == []

    def test_unidirectional_only_searches_left_to_right(self):
        bundle, matrix = birth_sentence_fixture()
        config = ExtractionConfig(
            beam_size=6, min_predicate_frequency=1, bidirectional=False
        )
        out = extract_sentence(bundle, matrix, config)
        assert out and all(e.direction == "L2R" for e in out)

    def test_extraction_invariants_hold(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            n = int(rng.integers(4, 9))
            values = rng.random((n, n))
            mid = int(rng.integers(2, n - 1))
            chunks = [
                ChunkSpan(0, 1, "w0"),
                ChunkSpan(mid, mid + 1, f"w{mid}"),
            ]
            bundle = bundle_of([f"w{i}" for i in range(n)], chunks)
            config = ExtractionConfig(beam_size=5, min_predicate_frequency=1)
            for ext in extract_sentence(bundle, WordAttentionMatrix(values), config):
                idx = ext.predicate_indices
                if ext.direction == "L2R":
                    assert all(ext.arg0.end <= i < ext.arg1.start for i in idx)
                    assert all(b > a for a, b in zip(idx, idx[1:]))
                else:
                    assert all(ext.arg1.end <= i < ext.arg0.start for i in idx)
                    assert all(b < a for a, b in zip(idx, idx[1:]))
                assert ext.raw_score >= ext.norm_score * len(idx) - 1e-12
