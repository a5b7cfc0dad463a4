import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from softcover import Channel, Distribution  # noqa: E402

LN2 = np.log(2.0)
P_BSC = (0.4, 0.6)
W_BSC = ((0.95, 0.05), (0.05, 0.95))
RATE = 0.85


@pytest.fixture
def bsc():
    return Distribution(P_BSC), Channel(W_BSC)


@pytest.fixture
def degenerate():
    return Distribution((0.3, 0.7)), Channel(((0.2, 0.8), (0.2, 0.8)))


@pytest.fixture
def bsc_file(tmp_path):
    path = tmp_path / "bsc05.json"
    path.write_text(json.dumps({"input_dist": list(P_BSC), "channel": [list(r) for r in W_BSC], "base": "bits"}))
    return path
