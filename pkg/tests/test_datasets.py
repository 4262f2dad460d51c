"""Bundled fixture datasets: invariants the experiments depend on."""

import pytest

from termspace import (
    levenshtein,
    noise_vocabulary,
    parse_specification,
    parse_terms,
    synonym_terms,
    tissue_queries,
    tissue_specification,
    write_fixture_files,
)
from termspace.vectorizers import tokenize


class TestNoiseVocabulary:
    def test_shape_and_ids(self):
        spec = noise_vocabulary()
        assert len(spec.terms) == 50
        assert [t.id for t in spec.terms] == [str(i) for i in range(1, 51)]
        assert spec.name == "noise50"

    def test_words_are_single_lowercase_tokens(self):
        for term in noise_vocabulary().terms:
            assert term.text == term.text.lower()
            assert tokenize(term.text) == [term.text]
            assert term.definition is None

    def test_minimum_pairwise_edit_distance(self):
        words = [t.text for t in noise_vocabulary().terms]
        smallest = min(
            levenshtein(a, b)
            for i, a in enumerate(words)
            for b in words[i + 1 :]
        )
        # >= 3 makes single-character noise unambiguous; the frozen list
        # actually achieves 4
        assert smallest == 4

    def test_no_duplicates(self):
        words = [t.text for t in noise_vocabulary().terms]
        assert len(set(words)) == 50


class TestTissueFixture:
    def test_every_entry_has_a_definition(self):
        spec = tissue_specification()
        assert len(spec.terms) == 4
        assert all(t.definition for t in spec.terms)
        assert spec.name == "tissue"

    def test_queries_resolve_to_vocabulary_entries(self):
        spec = tissue_specification()
        queries = tissue_queries()
        assert len(list(queries)) == 6
        assert queries.all_labeled()
        for q in queries:
            assert spec.id_of_text(q.label) is not None

    def test_acronym_expansion_lives_only_in_the_definition(self):
        spec = tissue_specification()
        expansion_tokens = set(tokenize("optimal cutting temperature"))
        for term in spec.terms:
            assert not expansion_tokens & set(tokenize(term.text))
        oct_entry = next(t for t in spec.terms if t.text == "OCT embedded")
        assert expansion_tokens <= set(tokenize(oct_entry.definition))


class TestSynonymTerms:
    def test_default_shape(self):
        terms = synonym_terms()
        listed = list(terms)
        assert len(listed) == 1500
        labels = {t.label for t in listed}
        assert len(labels) == 300
        per_group = {}
        for t in listed:
            per_group[t.label] = per_group.get(t.label, 0) + 1
        assert set(per_group.values()) == {5}

    def test_ids_are_unique_and_structured(self):
        listed = list(synonym_terms(n_groups=4, group_size=3))
        assert [t.id for t in listed] == [
            "g1m1", "g1m2", "g1m3",
            "g2m1", "g2m2", "g2m3",
            "g3m1", "g3m2", "g3m3",
            "g4m1", "g4m2", "g4m3",
        ]

    def test_seed_determinism(self):
        a = [t.text for t in synonym_terms(n_groups=10, seed=13)]
        b = [t.text for t in synonym_terms(n_groups=10, seed=13)]
        c = [t.text for t in synonym_terms(n_groups=10, seed=14)]
        assert a == b
        assert a != c

    def test_group_size_cap(self):
        with pytest.raises(ValueError, match="group_size"):
            synonym_terms(group_size=11)

    def test_groups_share_a_base_token(self):
        for label in ("g1", "g2", "g3"):
            group = [t for t in synonym_terms(n_groups=3) if t.label == label]
            shared = set.intersection(*(set(tokenize(t.text)) for t in group))
            assert shared  # every member mentions the group's base word


class TestWriteFixtureFiles:
    def test_writes_all_four_files(self, tmp_path):
        files = write_fixture_files(tmp_path)
        assert set(files) == {"noise50", "tissue_spec", "tissue_queries", "synonyms1500"}
        for path in files.values():
            assert path.exists()
            assert path.parent == tmp_path

    def test_headers(self, tmp_path):
        files = write_fixture_files(tmp_path)
        first_lines = {
            name: path.read_text(encoding="utf-8").split("\n")[0]
            for name, path in files.items()
        }
        assert first_lines["noise50"] == "id,term"
        assert first_lines["tissue_spec"] == "id,term,definition"
        assert first_lines["tissue_queries"] == "id,term,label"
        assert first_lines["synonyms1500"] == "id,term,label"

    def test_files_parse_back_to_the_fixtures(self, tmp_path):
        files = write_fixture_files(tmp_path)
        noise = parse_specification(
            files["noise50"].read_text(encoding="utf-8"), format="csv", name="noise50"
        )
        assert [t.text for t in noise.terms] == [
            t.text for t in noise_vocabulary().terms
        ]
        spec = parse_specification(
            files["tissue_spec"].read_text(encoding="utf-8"), format="csv"
        )
        assert [t.definition for t in spec.terms] == [
            t.definition for t in tissue_specification().terms
        ]
        queries = parse_terms(
            files["tissue_queries"].read_text(encoding="utf-8"), format="csv"
        )
        assert [t.label for t in queries] == [t.label for t in tissue_queries()]
        synonyms = parse_terms(
            files["synonyms1500"].read_text(encoding="utf-8"), format="csv"
        )
        assert [(t.id, t.text, t.label) for t in synonyms] == [
            (t.id, t.text, t.label) for t in synonym_terms()
        ]
