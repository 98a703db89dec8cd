import json
import os
from pathlib import Path

import pytest

SOURCE = Path(os.environ.get("PERDDE_SOURCE", Path(__file__).resolve().parents[2]))


@pytest.fixture
def source():
    return SOURCE


@pytest.fixture
def schema():
    return json.loads((SOURCE / "docs" / "report.schema.json").read_text())


@pytest.fixture
def load_config():
    def load(name):
        return json.loads((SOURCE / "configs" / f"{name}.json").read_text())

    return load
