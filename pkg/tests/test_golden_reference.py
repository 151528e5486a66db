"""The stored golden file must be exactly what the straight-line reference
produces, so edits to either side surface immediately."""
from datetime import datetime, timezone

import reference_impl as ref
from conftest import DATA, GOLDEN


def test_reference_reproduces_stored_golden():
    text = ref.generate_results(
        str(DATA / "fixture_dump.xml"),
        str(DATA / "barnstars.txt"),
        datetime(2021, 1, 15, tzinfo=timezone.utc),
        "fixture",
    )
    assert text == (GOLDEN / "results_fixture.csv").read_text(encoding="utf-8")
