from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import pytest

from nonmono.ingest import extract_features, read_barnstars
from nonmono.kb import load_builtin

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
DUMP_DATE = datetime(2021, 1, 15, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def kb1():
    return load_builtin("KB1")


@pytest.fixture(scope="session")
def kb2():
    return load_builtin("KB2")


@pytest.fixture(scope="session")
def fixture_dump_path():
    return DATA / "fixture_dump.xml"


@pytest.fixture(scope="session")
def small_dump_path():
    return DATA / "small_dump.xml"


@pytest.fixture(scope="session")
def barnstars_path():
    return DATA / "barnstars.txt"


@pytest.fixture(scope="session")
def barnstars(barnstars_path):
    return read_barnstars(str(barnstars_path))


@pytest.fixture(scope="session")
def fixture_features(fixture_dump_path):
    with open(fixture_dump_path, "rb") as fh:
        return extract_features(fh, DUMP_DATE)


@pytest.fixture(scope="session")
def feature_vectors(fixture_features):
    return {f.editor_id: f.as_dict() for f in fixture_features}
