from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toxkg.align import (
    AlignmentScores,
    Mapping,
    evaluate_alignment,
    filter_one_to_one,
    levenshtein_similarity,
    lexical_match,
    load_labels,
    load_mappings,
    preprocess_label,
    save_mappings,
)
from toxkg.errors import DataError


def edit_distance_oracle(a, b):
    # independent recursive formulation
    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


class TestLevenshteinSimilarity:
    def test_identity(self):
        assert levenshtein_similarity("Daphnia magna", "Daphnia magna") == 1.0

    def test_kitten_sitting(self):
        assert levenshtein_similarity("kitten", "sitting") == pytest.approx(1 - 3 / 7)

    def test_empty_vs_nonempty(self):
        assert levenshtein_similarity("", "abc") == 0.0

    def test_both_empty(self):
        assert levenshtein_similarity("", "") == 1.0

    @given(st.text(max_size=12), st.text(max_size=12))
    @settings(max_examples=300, deadline=None)
    def test_matches_recursive_oracle_and_symmetry(self, a, b):
        sim = levenshtein_similarity(a, b)
        assert sim == levenshtein_similarity(b, a)
        n = max(len(a), len(b))
        expected = 1.0 if n == 0 else 1.0 - edit_distance_oracle(a, b) / n
        assert sim == pytest.approx(expected, abs=1e-12)
        assert (sim == 1.0) == (a == b)


class TestPreprocessLabel:
    def test_lowercase_and_trim(self):
        assert preprocess_label("  Daphnia MAGNA ") == "daphnia magna"

    def test_strips_abbreviation_tokens(self):
        assert preprocess_label("Daphnia sp.") == "daphnia"
        assert preprocess_label("Lemna var. minor") == "lemna minor"


class TestLexicalMatch:
    def test_identical_vocabularies(self):
        src = {f"s{i}": [f"name {i}"] for i in range(5)}
        tgt = {f"t{i}": [f"name {i}"] for i in range(5)}
        got = lexical_match(src, tgt, 0.8)
        perfect = {m for m in got if m.confidence == 1.0}
        assert len(perfect) == 5
        assert {(m.source, m.target) for m in perfect} == {
            (f"s{i}", f"t{i}") for i in range(5)
        }

    def test_dissimilar_gives_empty(self):
        assert (
            lexical_match({"a": ["aardvark"]}, {"b": ["zzzzzzz"]}, 0.8) == set()
        )

    def test_single_typo_pair(self):
        src = {"a": ["salmonidae"], "b": ["qqqqqqqqqq"]}
        tgt = {"x": ["salmonidea"], "y": ["wwwwwwwwww"]}
        got = lexical_match(src, tgt, 0.75)
        assert {(m.source, m.target) for m in got} == {("a", "x")}
        (m,) = got
        assert m.confidence == pytest.approx(0.8)

    def test_threshold_is_strict(self):
        # similarity exactly 0.8: 1 edit over 5 chars
        src, tgt = {"a": ["abcde"]}, {"x": ["abcdX"]}
        assert lexical_match(src, tgt, 0.8) == set()
        assert len(lexical_match(src, tgt, 0.79)) == 1

    def test_max_pools_over_labels(self):
        src = {"a": ["completely different", "shared name"]}
        tgt = {"x": ["shared name"]}
        (m,) = lexical_match(src, tgt, 0.8)
        assert m.confidence == 1.0

    def test_bad_threshold_rejected(self):
        with pytest.raises(DataError):
            lexical_match({}, {}, 0.0)


class TestFilterOneToOne:
    def test_already_one_to_one(self):
        m = {Mapping("a", "x", 0.9), Mapping("b", "y", 0.8)}
        assert filter_one_to_one(m) == m

    def test_source_conflict_keeps_highest(self):
        m = {Mapping("a", "x", 0.9), Mapping("a", "y", 0.8)}
        assert filter_one_to_one(m) == {Mapping("a", "x", 0.9)}

    def test_target_conflict_keeps_highest(self):
        m = {Mapping("a", "x", 0.9), Mapping("b", "x", 0.95)}
        assert filter_one_to_one(m) == {Mapping("b", "x", 0.95)}

    def test_tie_breaks_lexicographically(self):
        m = {Mapping("b", "x", 0.9), Mapping("a", "x", 0.9)}
        assert filter_one_to_one(m) == {Mapping("a", "x", 0.9)}

    @given(
        st.sets(
            st.tuples(
                st.sampled_from("abcd"),
                st.sampled_from("wxyz"),
                st.floats(0, 1, allow_nan=False),
            ),
            max_size=16,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_output_one_to_one_and_no_larger(self, rows):
        m = {Mapping(s, t, c) for s, t, c in rows}
        got = filter_one_to_one(m)
        assert len(got) <= len(m)
        assert len({g.source for g in got}) == len(got)
        assert len({g.target for g in got}) == len(got)


class TestEvaluateAlignment:
    def test_perfect(self):
        m = {Mapping("a", "x"), Mapping("b", "y")}
        s = evaluate_alignment(m, m)
        assert s == AlignmentScores(num_mappings=2, recall=1.0, est_precision=1.0)

    def test_unjudgeable_mappings_excluded_from_precision(self):
        m = {Mapping("a", "x"), Mapping("b", "y")}
        ref = {Mapping("a", "x")}
        s = evaluate_alignment(m, ref)
        assert s.est_precision == 1.0
        assert s.recall == 1.0

    def test_wrong_mapping_with_known_source_counts_against(self):
        m = {Mapping("a", "y")}
        ref = {Mapping("a", "x")}
        s = evaluate_alignment(m, ref)
        assert s.est_precision == 0.0
        assert s.recall == 0.0

    def test_empty_reference_rejected(self):
        with pytest.raises(DataError):
            evaluate_alignment({Mapping("a", "x")}, set())

    def test_no_judgeable_mappings_gives_zero_precision(self):
        s = evaluate_alignment({Mapping("b", "y")}, {Mapping("a", "x")})
        assert s.est_precision == 0.0

    @given(
        st.sets(
            st.tuples(st.sampled_from("abcdef"), st.sampled_from("uvwxyz")),
            max_size=20,
        ),
        st.sets(
            st.tuples(st.sampled_from("abcdef"), st.sampled_from("uvwxyz")),
            min_size=1,
            max_size=20,
        ),
    )
    @settings(max_examples=200, deadline=None)
    def test_recall_same_on_judgeable_subset(self, m_rows, ref_rows):
        m = {Mapping(s, t) for s, t in m_rows}
        ref = {Mapping(s, t) for s, t in ref_rows}
        full = evaluate_alignment(m, ref)
        ref_sources = {r.source for r in ref}
        ref_targets = {r.target for r in ref}
        judgeable = {
            x for x in m if x.source in ref_sources or x.target in ref_targets
        }
        narrowed = evaluate_alignment(judgeable, ref)
        assert narrowed.recall == pytest.approx(full.recall)


class TestMappingFiles:
    def test_round_trip(self, tmp_path):
        f = tmp_path / "m.tsv"
        m = {Mapping("a", "x", 0.875), Mapping("b", "y", 1.0)}
        save_mappings(m, f)
        assert load_mappings(f) == m

    def test_confidence_optional(self, tmp_path):
        f = tmp_path / "m.tsv"
        f.write_text("a\tx\nb\ty\t0.5\n", encoding="utf-8")
        got = load_mappings(f)
        assert Mapping("a", "x", 1.0) in got
        assert Mapping("b", "y", 0.5) in got

    def test_bad_confidence_rejected(self, tmp_path):
        f = tmp_path / "m.tsv"
        f.write_text("a\tx\tnotanumber\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_mappings(f)

    def test_out_of_range_confidence_rejected(self, tmp_path):
        f = tmp_path / "m.tsv"
        f.write_text("a\tx\t1.5\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_mappings(f)

    def test_labels_accumulate(self, tmp_path):
        f = tmp_path / "labels.tsv"
        f.write_text("e1\tname one\ne1\talias\ne2\tother\n", encoding="utf-8")
        got = load_labels(f)
        assert got == {"e1": ["name one", "alias"], "e2": ["other"]}
