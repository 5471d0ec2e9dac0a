import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from screenlab import build_schema, encode, generate


@pytest.fixture(scope="session")
def synth_records():
    return generate(400, seed=20201054)


@pytest.fixture(scope="session")
def synth_matrix(synth_records):
    return encode(synth_records, build_schema(synth_records))
