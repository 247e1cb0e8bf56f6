import sys
from datetime import datetime
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rednote.corpus import Corpus, Document


def make_doc(doc_id, admission_id="a1", note_type="progress", when="2020-01-01T00:00:00",
             text="some note text", diagnosis=None):
    return Document(
        doc_id=doc_id,
        admission_id=admission_id,
        note_type=note_type,
        updated_at=datetime.fromisoformat(when),
        text=text,
        primary_diagnosis=diagnosis,
    )


@pytest.fixture
def small_corpus():
    docs = (
        make_doc("d1", "a1", "progress", "2020-01-01T08:00:00", "alpha beta gamma"),
        make_doc("d2", "a1", "progress", "2020-01-01T12:00:00", "alpha beta delta"),
        make_doc("d3", "a1", "radiology", "2020-01-01T09:00:00", "scan shows nothing"),
        make_doc("d4", "a2", "progress", "2020-01-02T08:00:00", "patient stable today"),
        make_doc("d5", "a2", "progress", "2020-01-02T10:00:00", "patient stable tonight"),
    )
    return Corpus(docs, label="fixture")
