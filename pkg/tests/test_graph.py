import pytest

from studyatlas.graph import (
    DecisionStore,
    MatcherConfig,
    ScholarlyGraph,
    apply_decisions,
    extract_graph,
    graph_from_json,
    graph_to_json,
    levenshtein,
    match_citations,
    normalize_name,
    resolve_review,
    shared_author_pairs,
    title_tokens,
)
from studyatlas.model import BibEntry, StudyRecord


def study(study_id, authors, year=2020):
    return StudyRecord.build(study_id, year, {}, authors=authors)


def entry(key, title, author="Smith, Sam", year=2020):
    fields = [("title", title), ("author", author)]
    if year is not None:
        fields.append(("year", str(year)))
    return BibEntry(key=key, entry_type="inproceedings", fields=tuple(fields))


class TestLevenshtein:
    @pytest.mark.parametrize("a,b,d", [
        ("kitten", "sitting", 3),
        ("same", "same", 0),
        ("", "abc", 3),
        ("abc", "", 3),
        ("toni roddiger", "toni röddiger", 1),
        ("mia keller", "mina kellers", 2),
    ])
    def test_distances(self, a, b, d):
        assert levenshtein(a, b) == d

    def test_symmetry(self):
        assert levenshtein("abcdef", "azced") == levenshtein("azced", "abcdef")


class TestNormalizeName:
    def test_trims_folds_and_collapses(self):
        assert normalize_name("  Ada   ALDER ") == "ada alder"

    def test_diacritics_preserved_by_default(self):
        assert normalize_name("Toni Röddiger") == "toni röddiger"

    def test_diacritics_strip_is_opt_in(self):
        assert normalize_name("Toni Röddiger", strip_diacritics=True) == "toni roddiger"


class TestSharedAuthors:
    def test_exact_match_makes_edge(self):
        a = study("a", ("T. Roddiger", "X. Yu"))
        b = study("b", ("T. Roddiger",))
        edges, queue = shared_author_pairs([a, b])
        assert len(edges) == 1
        assert edges[0].ids == ("a", "b")
        assert edges[0].shared == ("T. Roddiger",)
        assert queue == []

    def test_near_match_is_flagged_not_edged(self):
        a = study("a", ("T. Roddiger",))
        b = study("b", ("T. Röddiger",))
        edges, queue = shared_author_pairs([a, b])
        assert edges == []
        assert len(queue) == 1
        assert queue[0].kind == "author"
        assert queue[0].evidence_map["distance"] == "1"

    def test_distant_names_are_ignored(self):
        edges, queue = shared_author_pairs([study("a", ("A. Smith",)), study("b", ("B. Jones",))])
        assert edges == [] and queue == []

    @pytest.mark.parametrize("name_b,expect_edge,expect_flag", [
        ("Anna Example", True, False),    # distance 0
        ("Anna Examplee", False, True),   # distance 1
        ("Anne Exampl", False, True),     # distance 2
        ("Anna Examplexyz", False, False),  # distance 3
    ])
    def test_distance_bands(self, name_b, expect_edge, expect_flag):
        edges, queue = shared_author_pairs([study("a", ("Anna Example",)), study("b", (name_b,))])
        assert bool(edges) == expect_edge
        assert bool(queue) == expect_flag

    def test_edges_are_unordered(self):
        a = study("zz", ("P. Q.",))
        b = study("aa", ("P. Q.",))
        edges, _ = shared_author_pairs([a, b])
        assert edges[0].ids == ("aa", "zz")

    def test_fixture_author_graph(self, snapshot):
        pairs = snapshot.graph.author_pairs()
        assert ("alder2016tap", "alder2016tapx") in pairs
        assert ("braun2018hum", "chen2019glide") in pairs
        assert ("davis2020blink", "elgar2021nod") not in pairs  # near match stays queued
        flagged = {c.ids for c in snapshot.graph.review_queue if c.kind == "author"}
        assert ("davis2020blink", "elgar2021nod") in flagged


TITLE = "alpha beta gamma delta epsilon zeta eta theta iota kappa"


class TestMatchCitations:
    def corpus(self):
        records = [study("s1", ("Sam Smith",), 2020), study("s2", ("Jo Jones",), 2021)]
        bib = {
            "s1": entry("s1", TITLE, "Smith, Sam", 2020),
            "s2": entry("s2", "one two three four five six seven eight nine ten", "Jones, Jo", 2021),
        }
        return records, bib

    def test_perfect_match_confidence_one(self):
        records, bib = self.corpus()
        refs = {"s2": (entry("r", TITLE, "Smith, Sam", 2020),)}
        edges, queue, _ = match_citations(records, refs, bib)
        assert len(edges) == 1
        assert edges[0].citing == "s2" and edges[0].cited == "s1"
        assert edges[0].confidence == pytest.approx(1.0)
        assert queue == []

    def test_two_token_substitution_lands_in_review_band(self):
        # 8 of 10 tokens survive: jaccard 8/12, score = 0.7*(8/12) + 0.3 = 0.76667
        perturbed = TITLE.replace("alpha", "xray").replace("beta", "yankee")
        records, bib = self.corpus()
        refs = {"s2": (entry("r", perturbed, "Smith, Sam", 2020),)}
        edges, queue, _ = match_citations(records, refs, bib)
        assert edges == []
        assert len(queue) == 1
        assert queue[0].score == pytest.approx(0.7 * (8 / 12) + 0.3, abs=1e-12)

    def test_outside_work_matches_nothing(self):
        records, bib = self.corpus()
        refs = {"s2": (entry("r", "totally unrelated words everywhere here", "Zed Zorro", 1999),)}
        edges, queue, _ = match_citations(records, refs, bib)
        assert edges == [] and queue == []

    def test_each_reference_yields_at_most_one_edge(self):
        records, bib = self.corpus()
        bib["s3"] = entry("s3", TITLE, "Smith, Sam", 2020)  # same title as s1
        records.append(study("s3", ("Sam Smith",), 2020))
        refs = {"s2": (entry("r", TITLE, "Smith, Sam", 2020),)}
        edges, _, _ = match_citations(records, refs, bib)
        assert len(edges) == 1
        assert edges[0].cited == "s1"  # lexicographic tie-break

    def test_year_match_breaks_ties_before_id(self):
        records = [study("s1", (), 1999), study("s2", (), 2020), study("s9", (), 2021)]
        bib = {
            "s2": entry("s2", TITLE, "Smith, Sam", 1999),
            "s9": entry("s9", TITLE, "Smith, Sam", 2020),
        }
        refs = {"s1": (entry("r", TITLE, "Smith, Sam", 2020),)}
        edges, _, _ = match_citations(records, refs, bib)
        assert edges[0].cited == "s9"

    def test_self_reference_never_matches(self):
        records, bib = self.corpus()
        refs = {"s1": (entry("r", TITLE, "Smith, Sam", 2020),)}
        edges, queue, _ = match_citations(records, refs, bib)
        assert edges == [] and queue == []

    def test_backwards_year_warns(self):
        records = [study("s1", (), 2019), study("s2", (), 2021)]
        bib = {
            "s1": entry("s1", TITLE, "Smith, Sam", 2019),
            "s2": entry("s2", "one two three four five six seven eight nine ten", "Jones, Jo", 2021),
        }
        refs = {"s1": (entry("r", "one two three four five six seven eight nine ten", "Jones, Jo", 2021),)}
        edges, _, warnings = match_citations(records, refs, bib)
        assert edges and any("precedes" in w for w in warnings)

    def test_title_tokens_are_lowercased_alnum(self):
        assert title_tokens("Tap-Input: On the EAR!") == frozenset({"tap", "input", "on", "the", "ear"})


class TestReviewFlow:
    def queue_graph(self):
        a = study("a", ("T. Roddiger",))
        b = study("b", ("T. Röddiger",))
        edges, queue = shared_author_pairs([a, b])
        return ScholarlyGraph(author_edges=tuple(edges), review_queue=tuple(queue))

    def test_accept_promotes_to_edge(self, tmp_path):
        graph = self.queue_graph()
        store = DecisionStore(tmp_path / "decisions.jsonl")
        updated = resolve_review(graph, graph.review_queue[0].key, "accept", store)
        assert updated.review_queue == ()
        assert len(updated.author_edges) == 1

    def test_reject_discards(self, tmp_path):
        graph = self.queue_graph()
        store = DecisionStore(tmp_path / "decisions.jsonl")
        updated = resolve_review(graph, graph.review_queue[0].key, "reject", store)
        assert updated.review_queue == ()
        assert updated.author_edges == ()

    def test_unknown_key_raises(self, tmp_path):
        graph = self.queue_graph()
        store = DecisionStore(tmp_path / "decisions.jsonl")
        with pytest.raises(KeyError):
            resolve_review(graph, "feedfacefeedface", "accept", store)

    def test_key_prefix_is_accepted(self, tmp_path):
        graph = self.queue_graph()
        store = DecisionStore(tmp_path / "decisions.jsonl")
        updated = resolve_review(graph, graph.review_queue[0].key[:10], "reject", store)
        assert updated.review_queue == ()

    def test_decisions_replay_across_rebuilds(self, tmp_path, fixture_inputs):
        schema, records, _, abstracts, _, bib, references, _ = fixture_inputs
        path = tmp_path / "decisions.jsonl"
        store = DecisionStore(path)
        graph = extract_graph(records, references, bib, store=store)
        target = next(c for c in graph.review_queue
                      if c.kind == "author" and c.ids == ("davis2020blink", "elgar2021nod"))
        resolve_review(graph, target.key, "accept", store)

        # Fresh extraction with a store re-read from disk: the accept persists.
        rebuilt = extract_graph(records, references, bib, store=DecisionStore(path))
        assert ("davis2020blink", "elgar2021nod") in rebuilt.author_pairs()
        assert all(c.key != target.key for c in rebuilt.review_queue)

    def test_rejected_candidates_stay_out(self, tmp_path, fixture_inputs):
        schema, records, _, abstracts, _, bib, references, _ = fixture_inputs
        path = tmp_path / "decisions.jsonl"
        store = DecisionStore(path)
        graph = extract_graph(records, references, bib, store=store)
        citation = next(c for c in graph.review_queue if c.kind == "citation")
        resolve_review(graph, citation.key, "reject", store)
        rebuilt = extract_graph(records, references, bib, store=DecisionStore(path))
        assert (citation.ids[0], citation.ids[1]) not in rebuilt.citation_pairs()
        assert all(c.key != citation.key for c in rebuilt.review_queue)

    def test_no_silent_promotion(self, fixture_inputs):
        schema, records, _, abstracts, _, bib, references, _ = fixture_inputs
        graph = extract_graph(records, references, bib)
        queued_pairs = {c.ids for c in graph.review_queue if c.kind == "citation"}
        for citing, cited in graph.citation_pairs():
            assert (citing, cited) not in queued_pairs

    def test_graph_json_round_trip(self, snapshot):
        graph = snapshot.graph
        assert graph_from_json(graph_to_json(graph)) == graph


class TestConfigThresholds:
    def test_thresholds_are_adjustable(self):
        records = [study("s1", (), 2020), study("s2", (), 2021)]
        bib = {
            "s1": entry("s1", TITLE, "Smith, Sam", 2020),
            "s2": entry("s2", "one two three four five six seven eight nine ten", "Jones, Jo", 2021),
        }
        perturbed = TITLE.replace("alpha", "xray").replace("beta", "yankee")  # score 0.767
        refs = {"s2": (entry("r", perturbed, "Smith, Sam", 2020),)}
        lenient = MatcherConfig(auto_threshold=0.7)
        edges, queue, _ = match_citations(records, refs, bib, lenient)
        assert len(edges) == 1 and queue == []


class TestLevenshteinLimit:
    @pytest.mark.parametrize("a,b,limit,expected", [
        ("kitten", "sitting", 2, 3),     # true distance 3 -> reported as limit + 1
        ("kitten", "sitting", 3, 3),     # exact at the limit
        ("abc", "abcd", 2, 1),
        ("short", "muchlongerstring", 2, 3),  # length gap alone exceeds the limit
    ])
    def test_banded_results(self, a, b, limit, expected):
        assert levenshtein(a, b, limit=limit) == expected

    def test_limit_never_changes_decisions(self):
        import random

        rng = random.Random(9)
        alphabet = "abcdef"
        for _ in range(300):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            exact = levenshtein(a, b)
            banded = levenshtein(a, b, limit=2)
            if exact <= 2:
                assert banded == exact
            else:
                assert banded == 3
