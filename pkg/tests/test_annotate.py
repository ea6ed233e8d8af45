"""Gazetteer matching, blacklist cleanup, and annotation serialization."""

import random

import pytest

from topictrends.annotate import (
    Blacklist,
    EntityAnnotation,
    Gazetteer,
    annotate_gazetteer,
    apply_blacklist,
    load_blacklist,
    load_gazetteer,
    read_annotations_jsonl,
    write_annotations_jsonl,
)
from topictrends.errors import MalformedLine


def gaz(entries):
    return Gazetteer(entries)


BASIC = {
    "cloud computing": ("Cloud computing", 0.8),
    "internet of things": ("Internet of things", 0.9),
}


class TestAnnotateGazetteer:
    def test_two_matches_at_expected_offsets(self):
        text = "Cloud computing meets the Internet of Things"
        annos = annotate_gazetteer(text, gaz(BASIC))
        assert [(a.start, a.end) for a in annos] == [(0, 15), (26, 44)]
        assert [a.entity_title for a in annos] == ["Cloud computing", "Internet of things"]
        assert annos[0].mention == "Cloud computing"
        assert annos[1].mention == "Internet of Things"

    def test_longest_match_wins(self):
        entries = dict(BASIC)
        entries["cloud"] = ("Cloud", 0.7)
        annos = annotate_gazetteer("Cloud computing meets the Internet of Things", gaz(entries))
        assert [a.entity_title for a in annos] == ["Cloud computing", "Internet of things"]

    def test_min_link_probability_filters_all(self):
        annos = annotate_gazetteer(
            "Cloud computing meets the Internet of Things", gaz(BASIC), min_link_probability=0.95
        )
        assert annos == []

    def test_low_probability_entry_lets_shorter_match_through(self):
        entries = {
            "cloud computing": ("Cloud computing", 0.3),
            "cloud": ("Cloud", 0.9),
        }
        annos = annotate_gazetteer("cloud computing", gaz(entries), min_link_probability=0.5)
        assert [a.entity_title for a in annos] == ["Cloud"]
        assert annos[0].end == 5

    def test_no_match_inside_words(self):
        entries = {"art": ("Art", 0.9)}
        assert annotate_gazetteer("smart artworks", gaz(entries)) == []
        assert len(annotate_gazetteer("state of the art", gaz(entries))) == 1

    def test_case_folded_matching_keeps_original_mention(self):
        annos = annotate_gazetteer("CLOUD COMPUTING rules", gaz(BASIC))
        assert annos[0].mention == "CLOUD COMPUTING"
        assert annos[0].score == 0.8

    def test_repeated_mentions_all_reported(self):
        text = "cloud computing and cloud computing"
        annos = annotate_gazetteer(text, gaz(BASIC))
        assert len(annos) == 2
        assert annos[0].end <= annos[1].start

    def test_deterministic_across_runs(self):
        text = "Internet of Things, cloud computing, internet of things."
        first = annotate_gazetteer(text, gaz(BASIC))
        second = annotate_gazetteer(text, gaz(BASIC))
        assert first == second

    def test_properties_on_random_texts(self):
        rng = random.Random(99)
        vocabulary = ["alpha", "beta", "gamma", "delta", "omega", "sigma"]
        entries = {}
        for a in vocabulary:
            entries[a] = (a.capitalize(), 0.5)
            for b in vocabulary:
                if rng.random() < 0.3:
                    entries[f"{a} {b}"] = (f"{a.capitalize()} {b.capitalize()}", 0.7)
        g = gaz(entries)
        for _ in range(100):
            words = [rng.choice(vocabulary + ["filler", "xyz"]) for _ in range(rng.randint(0, 25))]
            text = " ".join(w.upper() if rng.random() < 0.3 else w for w in words)
            annos = annotate_gazetteer(text, g)
            for a, b in zip(annos, annos[1:]):
                assert a.end <= b.start  # sorted and non-overlapping
            for a in annos:
                assert 0 <= a.start < a.end <= len(text)
                assert a.mention == text[a.start : a.end]
                assert a.mention.casefold() in g

    def test_surface_must_start_with_word_character(self):
        with pytest.raises(ValueError):
            Gazetteer({"-odd": ("Odd", 0.5)})

    def test_empty_surface_rejected(self):
        with pytest.raises(ValueError):
            Gazetteer({"   ": ("Blank", 0.5)})

    def test_probability_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Gazetteer({"fine": ("Fine", 1.5)})


class TestGazetteerFile:
    def test_tsv_loads_and_normalizes(self):
        raw = b"Cloud  Computing\tCloud computing\t0.8\n# note\n\ninternet of things\tInternet of things\t0.9\n"
        g = load_gazetteer(raw)
        assert len(g) == 2
        assert "cloud computing" in g

    def test_bad_field_count_reports_line(self):
        with pytest.raises(MalformedLine) as err:
            load_gazetteer(b"cloud computing\t0.8\n")
        assert err.value.line_number == 1

    def test_bad_probability_reports_line(self):
        with pytest.raises(MalformedLine):
            load_gazetteer(b"cloud\tCloud\thigh\n")


class TestBlacklist:
    def anno(self, title):
        return EntityAnnotation(
            doc_id="d", entity_id=title, entity_title=title, mention=title.lower(),
            start=0, end=len(title), score=0.5,
        )

    def test_removes_blacklisted_titles(self):
        annos = [self.anno("Elsevier"), self.anno("Cloud computing")]
        out = apply_blacklist(annos, Blacklist({"Elsevier"}))
        assert [a.entity_title for a in out] == ["Cloud computing"]

    def test_empty_blacklist_is_identity(self):
        annos = [self.anno("Emerald"), self.anno("Budapest")]
        assert apply_blacklist(annos, Blacklist()) == annos

    def test_everything_blacklisted(self):
        annos = [self.anno("Emerald"), self.anno("Hungary")]
        assert apply_blacklist(annos, Blacklist({"emerald", "HUNGARY"})) == []

    def test_idempotent(self):
        annos = [self.anno("Emerald"), self.anno("Cloud computing"), self.anno("Budapest")]
        b = Blacklist({"Emerald", "Budapest"})
        once = apply_blacklist(annos, b)
        assert apply_blacklist(once, b) == once

    def test_file_loader_skips_comments(self):
        b = load_blacklist(b"# noise entities\nEmerald\nElsevier\n\nHungary\nBudapest\n")
        assert len(b) == 4
        assert "elsevier" in b


class TestAnnotationsJsonl:
    def test_round_trip(self):
        annos = [
            EntityAnnotation(
                doc_id=f"W{i}", entity_id=str(100 + i), entity_title=f"Topic {i}",
                mention=f"topic {i}", start=i, end=i + 7, score=round(0.1 * i + 0.05, 3),
            )
            for i in range(9)
        ]
        assert read_annotations_jsonl(write_annotations_jsonl(annos)) == annos

    def test_empty_round_trip(self):
        assert read_annotations_jsonl(write_annotations_jsonl([])) == []

    def test_bad_record_reports_line(self):
        good = write_annotations_jsonl(
            [EntityAnnotation(doc_id="W1", entity_id="1", entity_title="T",
                              mention="t", start=0, end=1, score=0.5)]
        )
        with pytest.raises(MalformedLine) as err:
            read_annotations_jsonl(good + b'{"doc_id":"W2"}\n')
        assert err.value.line_number == 2
