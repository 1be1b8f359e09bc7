import json

import pytest

from reslab.maps import parse_map_spec

# four-branch map with a size-2 nilpotent block in its weighted transfer matrix
JORDAN_SPEC = {
    "type": "affine_markov",
    "partition": [0.0, 0.25, 0.5, 0.75, 1.0],
    "branches": [
        {"slope": 3.0, "offset": 0.25},
        {"slope": 3.0, "offset": -0.75},
        {"slope": 2.0, "offset": -1.0},
        {"slope": 3.0, "offset": -2.25},
    ],
}

DOUBLING_SPEC = {
    "type": "affine_markov",
    "partition": [0.0, 0.5, 1.0],
    "branches": [{"slope": 2.0, "offset": 0.0}, {"slope": 2.0, "offset": -1.0}],
}

TRIPLING_SPEC = {
    "type": "affine_markov",
    "partition": [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
    "branches": [
        {"slope": 3.0, "offset": 0.0},
        {"slope": 3.0, "offset": -1.0},
        {"slope": 3.0, "offset": -2.0},
    ],
}

_R3 = 2.0 - 3.0**0.5
_R2 = 2.0 - 2.0**0.5

# 4x - x^2 reduced mod 1; three increasing branches onto (0,1)
QUAD_SPEC = {
    "type": "smooth_full_branch",
    "partition": [0.0, _R3, _R2, 1.0],
    "branches": [
        {"expr": "4*x - x^2"},
        {"expr": "4*x - x^2 - 1"},
        {"expr": "4*x - x^2 - 2"},
    ],
}

# intermittent-style map: neutral fixed point at 0, second branch affine
LSV_SPEC = {
    "type": "monotone_full_branch",
    "partition": [0.0, 0.5, 1.0],
    "branches": [{"expr": "x*(1 + 2^0.5*x^0.5)"}, {"expr": "2*x - 1"}],
}


def make_map(spec: dict):
    return parse_map_spec(json.dumps(spec))


@pytest.fixture(scope="session")
def jordan_map():
    return make_map(JORDAN_SPEC)


@pytest.fixture(scope="session")
def doubling_map():
    return make_map(DOUBLING_SPEC)


@pytest.fixture(scope="session")
def tripling_map():
    return make_map(TRIPLING_SPEC)


@pytest.fixture(scope="session")
def quad_map():
    return make_map(QUAD_SPEC)


@pytest.fixture(scope="session")
def lsv_map():
    return make_map(LSV_SPEC)
