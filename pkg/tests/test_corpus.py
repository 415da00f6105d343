import json

import numpy as np
import pytest

from conftest import make_corpus, make_paper
from topcite.corpus import (CitationHistory, Corpus, CorpusError, SynthParams,
                            cohort, generate_synthetic_corpus, load_corpus,
                            planted_ids, save_corpus, validate_corpus)
from topcite.labeling import accumulated_citations


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def record(i, year=2018, refs=(), max_year=2020, **over):
    rec = {
        "id": f"10.1000/test.{i:04d}", "journal": "acs-test",
        "pub_year": year, "title": f"Paper {i}",
        "abstract": f"study of process {i}", "domain": "Sciences",
        "field": "Chemistry", "subfield": "Materials",
        "yearly_citations": [1] * (max_year - year + 1),
        "references": [f"10.1000/test.{r:04d}" for r in refs],
    }
    rec.update(over)
    return rec


class TestLoadCorpus:
    def test_three_records_two_citations(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record(0, 2015), record(1, 2016, refs=[0]),
                           record(2, 2017, refs=[0])])
        corpus = load_corpus(path)
        assert len(corpus.papers) == 3
        assert len(corpus.citations) == 2
        assert corpus.max_data_year == 2020

    def test_duplicate_id_names_both_lines(self, tmp_path):
        path = tmp_path / "c.jsonl"
        recs = [record(i, 2015) for i in range(9)]
        recs[8] = record(3, 2015)  # duplicate of line 4 on line 9
        write_jsonl(path, recs)
        with pytest.raises(CorpusError, match=r"lines 4 and 9"):
            load_corpus(path)

    def test_dangling_reference_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record(0, 2015, refs=[99])])
        with pytest.raises(CorpusError, match="test.0099"):
            load_corpus(path)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        with open(path, "w") as f:
            f.write(json.dumps(record(0, 2015)) + "\n")
            f.write("{not json\n")
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path)

    def test_short_history_rejected_at_load(self, tmp_path):
        path = tmp_path / "c.jsonl"
        bad = record(1, 2015)
        bad["yearly_citations"] = [1, 2]  # window is 6 years
        write_jsonl(path, [record(0, 2015), bad])
        with pytest.raises(CorpusError, match="history length"):
            load_corpus(path)

    def test_doi_case_insensitive(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record(0, 2015, id="10.1000/TEST.0000"),
                           record(1, 2015, refs=[0])])
        corpus = load_corpus(path)
        assert "10.1000/test.0000" in corpus.papers

    def test_whitespace_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record(0, 2015, id="10.1000/a b")])
        with pytest.raises(CorpusError, match="whitespace"):
            load_corpus(path)

    def test_round_trip_equals_generated(self, tmp_path):
        corpus = generate_synthetic_corpus(1000, seed=3)
        path = tmp_path / "synth.jsonl"
        save_corpus(corpus, path)
        loaded = load_corpus(path)
        assert loaded.max_data_year == corpus.max_data_year
        assert loaded.citations == corpus.citations
        assert set(loaded.papers) == set(corpus.papers)
        for pid, paper in corpus.papers.items():
            assert loaded.papers[pid] == paper
            assert loaded.histories[pid] == corpus.histories[pid]

    def test_save_load_save_byte_identical(self, tmp_path):
        corpus = generate_synthetic_corpus(100, seed=5)
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_corpus(corpus, p1)
        save_corpus(load_corpus(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestValidate:
    def test_future_citation_reported(self):
        corpus = make_corpus([(0, 2012), (1, 2015)], citations=[(0, 1)])
        report = validate_corpus(corpus)
        temporal = report.by_kind("temporal")
        assert len(temporal) == 1
        assert "test.0000" in temporal[0].subject_id
        assert "test.0001" in temporal[0].detail

    def test_clean_synthetic_corpus_is_empty(self, synth_corpus):
        assert validate_corpus(synth_corpus)
        assert validate_corpus(synth_corpus).violations == []

    def test_bad_history_length_listed(self):
        corpus = make_corpus([(0, 2015, (1, 2, 3))])  # window is 6
        report = validate_corpus(corpus)
        assert len(report.by_kind("history_length")) == 1

    def test_empty_abstract_flagged_not_fatal(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_jsonl(path, [record(0, 2015, abstract="")])
        corpus = load_corpus(path)  # loadable
        assert len(validate_corpus(corpus).by_kind("empty_abstract")) == 1

    def test_report_csv_columns(self, tmp_path):
        corpus = make_corpus([(0, 2012), (1, 2015)], citations=[(0, 1)])
        out = tmp_path / "report.csv"
        validate_corpus(corpus).to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "kind,subject_id,detail"
        assert len(lines) == 2


class TestCohort:
    def test_horizon_bound(self):
        corpus = make_corpus([(0, 2009), (1, 2010), (2, 2011)])
        got = cohort(corpus, "acs-test", 10)
        assert got == {"10.1000/test.0000", "10.1000/test.0001"}

    def test_horizon_zero_returns_all(self):
        corpus = make_corpus([(0, 2009), (1, 2020)])
        assert len(cohort(corpus, "acs-test", 0)) == 2

    def test_unknown_journal_empty(self):
        corpus = make_corpus([(0, 2009)])
        assert cohort(corpus, "nope", 0) == set()

    def test_matches_linear_scan_oracle(self, synth_corpus):
        journal = synth_corpus.papers[next(iter(synth_corpus.papers))].journal
        for horizon in (0, 3, 7, 10):
            expected = {pid for pid, p in synth_corpus.papers.items()
                        if p.journal == journal
                        and p.pub_year + horizon <= synth_corpus.max_data_year}
            assert cohort(synth_corpus, journal, horizon) == expected


class TestSynthetic:
    def test_deterministic(self):
        a = generate_synthetic_corpus(100, seed=7)
        b = generate_synthetic_corpus(100, seed=7)
        assert a.papers == b.papers
        assert a.histories == b.histories
        assert a.citations == b.citations

    def test_different_seeds_differ(self):
        a = generate_synthetic_corpus(100, seed=7)
        b = generate_synthetic_corpus(100, seed=8)
        assert a.histories != b.histories

    def test_planted_count_exact(self):
        for n, frac in ((100, 0.2), (55, 0.3), (10, 0.25)):
            corpus = generate_synthetic_corpus(
                n, seed=1, params=SynthParams(planted_fraction=frac))
            assert len(planted_ids(corpus)) == int(np.floor(frac * n + 0.5))

    def test_planted_dominate_acc_at_y5(self):
        corpus = generate_synthetic_corpus(400, seed=2)
        planted = planted_ids(corpus)
        acc = {pid: accumulated_citations(h, 5)
               for pid, h in corpus.histories.items()
               if corpus.papers[pid].pub_year + 5 <= corpus.max_data_year}
        planted_mean = np.mean([a for pid, a in acc.items()
                                if pid in planted])
        background_mean = np.mean([a for pid, a in acc.items()
                                   if pid not in planted])
        assert planted_mean > background_mean

    def test_references_never_point_forward(self, synth_corpus):
        for citing, cited in synth_corpus.citations:
            assert synth_corpus.papers[citing].pub_year >= \
                synth_corpus.papers[cited].pub_year

    def test_min_size(self):
        with pytest.raises(ValueError):
            generate_synthetic_corpus(1, seed=0)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            generate_synthetic_corpus(
                10, seed=0, params=SynthParams(planted_fraction=1.5))
