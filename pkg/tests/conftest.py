import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from topcite.corpus import (CitationHistory, Corpus, Paper, SynthParams,
                            generate_synthetic_corpus)


def make_paper(i, year, journal="acs-test", abstract=None, title=None):
    pid = f"10.1000/test.{i:04d}"
    return Paper(id=pid, journal=journal, pub_year=year,
                 title=title if title is not None else f"Paper {i}",
                 abstract=abstract if abstract is not None
                 else f"study of process {i}",
                 domain="Sciences", field="Chemistry", subfield="Materials")


def make_corpus(entries, citations=(), max_data_year=2020):
    """entries: list of (i, year) or (i, year, counts)."""
    papers, histories = {}, {}
    for entry in entries:
        i, year = entry[0], entry[1]
        counts = entry[2] if len(entry) > 2 else \
            tuple(1 for _ in range(max_data_year - year + 1))
        p = make_paper(i, year)
        papers[p.id] = p
        histories[p.id] = CitationHistory(paper_id=p.id, counts=tuple(counts))
    cites = frozenset((f"10.1000/test.{a:04d}", f"10.1000/test.{b:04d}")
                      for a, b in citations)
    return Corpus(papers=papers, histories=histories, citations=cites,
                  max_data_year=max_data_year)


@pytest.fixture(scope="session")
def synth_corpus():
    return generate_synthetic_corpus(300, seed=7)


@pytest.fixture(scope="session")
def small_synth_corpus():
    return generate_synthetic_corpus(
        60, seed=11, params=SynthParams(refs_per_paper=3))
