import os
import pathlib

import pytest

DATA = pathlib.Path(os.environ.get("PMETRIC_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


@pytest.fixture
def data():
    return DATA
