import json
import math
import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from python_hardyverify.geometry import euclidean, hyperbolic
from python_hardyverify.profiles import make_bump, make_testfunction
from python_hardyverify.quadrature import QuadratureSpec

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("ci", max_examples=20, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

PINNED_FILE = Path(__file__).parent / "data" / "pinned_values.json"
PINNED_RTOL = 1.0e-8


@pytest.fixture
def spec():
    return QuadratureSpec()


@pytest.fixture
def H3():
    return hyperbolic(3)


@pytest.fixture
def R3():
    return euclidean(3)


@pytest.fixture
def bump13():
    return make_bump(1.0, 3.0)


@pytest.fixture
def radial_bump_H3(H3, bump13):
    """bump(1,3) P_0 on H^3"""
    return make_testfunction(H3, [(0, bump13)])


@pytest.fixture
def radial_bump_R3(R3, bump13):
    """bump(1,3) P_0 on R^3"""
    return make_testfunction(R3, [(0, bump13)])


class Pinned:
    """
    Regression constants from tests/data/pinned_values.json; every run must
    reproduce them to PINNED_RTOL relative. A key missing from the file
    fails unless HYP_UPDATE_PINNED=1, which records it instead.
    """

    def __init__(self, path: Path, update: bool = False):
        self.path = path
        self.update = update
        self.values = json.loads(path.read_text()) if path.exists() else {}
        self.dirty = False

    def check(self, key: str, value: float) -> None:
        value = float(value)
        assert math.isfinite(value), f"{key}: {value}"
        if key not in self.values:
            if not self.update:
                pytest.fail(f"{key} is not pinned in {self.path.name} (rerun with HYP_UPDATE_PINNED=1 to record {value!r})")
            self.values[key] = value
            self.dirty = True
            return
        assert value == pytest.approx(self.values[key], rel=PINNED_RTOL, abs=1e-300), key

    def save(self) -> None:
        if self.dirty:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(self.values, indent=2, sort_keys=True) + "\n")
            self.dirty = False


@pytest.fixture(scope="session")
def pinned():
    store = Pinned(PINNED_FILE, update=os.environ.get("HYP_UPDATE_PINNED") == "1")
    yield store
    store.save()
