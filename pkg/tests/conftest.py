import numpy as np
import pytest

from cascadenet.interdep import GeoGrid, create_network
from cascadenet.model import load_model
from cascadenet.synthetic import load_case_study


def toy_infra(name, levels, nodes, arcs, node_rate=(0.005, 0.0), arc_rate=(0.01, 0.0)):
    """Config block; ``nodes`` is a list of (id, level, lat, lon), ``arcs`` of (id, from, to)."""
    return {
        "name": name,
        "levels": list(levels),
        "nodes": [
            {"id": i, "level": lv, "lat": lat, "lon": lon,
             "rate": {"mean": node_rate[0], "std": node_rate[1]}}
            for i, lv, lat, lon in nodes
        ],
        "arcs": [
            {"id": i, "from": a, "to": b, "rate": {"mean": arc_rate[0], "std": arc_rate[1]}}
            for i, a, b in arcs
        ],
    }


def chain_infra(name, lat0=0.1, lon0=0.1, **kw):
    """source -> mid -> sink, one node per level."""
    return toy_infra(
        name, ["source", "mid", "sink"],
        [(1, 1, lat0, lon0), (2, 2, lat0 + 0.3, lon0), (3, 3, lat0 + 0.6, lon0)],
        [(1, 1, 2), (2, 2, 3)], **kw,
    )


@pytest.fixture(scope="session")
def case_study():
    return load_case_study()


@pytest.fixture(scope="session")
def case_grid(case_study):
    return GeoGrid.covering(case_study.networks)


@pytest.fixture(scope="session")
def case_builder(case_study, case_grid):
    cache = {}

    def build(gamma):
        if gamma not in cache:
            cache[gamma] = create_network(case_study.networks, case_study.rules, case_grid, gamma)
        return cache[gamma]

    return build


@pytest.fixture
def two_infra_model():
    """Two mirrored chains that depend on each other's sinks."""
    doc = {
        "infrastructures": [chain_infra("a"), chain_infra("b", lon0=0.6)],
        "dependency_rules": [
            {"parent": "a", "child": "b", "parent_levels": ["sink"]},
            {"parent": "b", "child": "a", "parent_levels": ["sink"]},
        ],
        "importance": [[0, 1], [1, 0]],
    }
    return load_model(doc)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
