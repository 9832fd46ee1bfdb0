"""Synthetic leveled infrastructure networks and the bundled case study.

The case study mirrors the three-infrastructure setting: an electricity
network (generators feeding buses over lines), a radial water network
(3 sources, 5 treatment plants, 6 storage and 16 distribution reservoirs)
and a supply chain (3 suppliers, 5 manufacturers, 7 retailers), all placed
on one region so that proximity edges can form.
"""
from __future__ import annotations

import json
from importlib import resources
from typing import Sequence

import numpy as np

from .model import Model, load_model

# (lat_min, lat_max, lon_min, lon_max) of the study region
REGION = (33.0, 35.5, -117.0, -114.0)
CASE_STUDY_SEED = 2021

ELECTRICITY = {
    "name": "electricity",
    "levels": [("generators", 14, 0.003, 0.001), ("buses", 24, 0.002, 0.001)],
    "arc_rate": (0.007, 0.003),
}
WATER = {
    "name": "water",
    "levels": [
        ("sources", 3, 0.005, 0.001),
        ("treatment plants", 5, 0.008, 0.001),
        ("storage reservoirs", 6, 0.009, 0.002),
        ("distribution reservoirs", 16, 0.01, 0.002),
    ],
    "arc_rate": (0.01, 0.001),
}
SUPPLY_CHAIN = {
    "name": "supply chain",
    "levels": [
        ("suppliers", 3, 0.005, 0.001),
        ("manufacturers", 5, 0.008, 0.001),
        ("retailers", 7, 0.009, 0.002),
    ],
    "arc_rate": (0.01, 0.001),
}


def layered_network(
    spec: dict,
    rng: np.random.Generator,
    region: Sequence[float] = REGION,
    max_parents: int = 2,
) -> dict:
    """Config document for one leveled network.

    Each node links to between 1 and ``max_parents`` of its nearest nodes on
    the level above; upstream nodes left without a child get linked to their
    nearest child so that every level keeps flowing.
    """
    lat0, lat1, lon0, lon1 = region
    nodes, arcs = [], []
    levels = []
    next_id = 1
    for depth, (lname, count, mean, std) in enumerate(spec["levels"], start=1):
        lat = rng.uniform(lat0, lat1, count)
        lon = rng.uniform(lon0, lon1, count)
        ids = list(range(next_id, next_id + count))
        next_id += count
        for j, nid in enumerate(ids):
            nodes.append({
                "id": nid, "level": depth, "lat": round(float(lat[j]), 4),
                "lon": round(float(lon[j]), 4), "rate": {"mean": mean, "std": std},
                "label": f"{lname} {j + 1}",
            })
        levels.append((ids, np.column_stack([lat, lon])))

    arc_mean, arc_std = spec["arc_rate"]
    links = set()
    for (up_ids, up_xy), (down_ids, down_xy) in zip(levels, levels[1:]):
        dist = np.linalg.norm(down_xy[:, None, :] - up_xy[None, :, :], axis=2)
        for j, child in enumerate(down_ids):
            k = int(rng.integers(1, min(max_parents, len(up_ids)) + 1))
            for p in np.argsort(dist[j], kind="stable")[:k]:
                links.add((up_ids[p], child))
        fed = {a for a, _ in links}
        for p, parent in enumerate(up_ids):
            if parent not in fed:
                links.add((parent, down_ids[int(np.argmin(dist[:, p]))]))
    for aid, (a, b) in enumerate(sorted(links), start=1):
        arcs.append({"id": aid, "from": a, "to": b, "rate": {"mean": arc_mean, "std": arc_std}})
    return {
        "name": spec["name"],
        "levels": [lv[0] for lv in spec["levels"]],
        "nodes": nodes,
        "arcs": arcs,
    }


def case_study_config(seed: int = CASE_STUDY_SEED) -> dict:
    """Three-infrastructure config document with relative importance R1."""
    rng = np.random.default_rng(seed)
    infras = [layered_network(spec, rng) for spec in (ELECTRICITY, WATER, SUPPLY_CHAIN)]
    return {
        "infrastructures": infras,
        "dependency_rules": [
            {"parent": "water", "child": "electricity",
             "parent_levels": ["distribution reservoirs"], "child_levels": ["buses"]},
            {"parent": "electricity", "child": "water", "parent_levels": ["buses"]},
            {"parent": "electricity", "child": "supply chain", "parent_levels": ["buses"]},
            {"parent": "water", "child": "supply chain",
             "parent_levels": ["distribution reservoirs"]},
        ],
        "importance": "R1",
    }


def case_study_path():
    return resources.files("cascadenet") / "data" / "case_study.json"


def load_case_study() -> Model:
    """The bundled case-study model."""
    return load_model(case_study_path().read_text(encoding="utf-8"))


def write_case_study(path, seed: int = CASE_STUDY_SEED) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(case_study_config(seed), fh, indent=1)
        fh.write("\n")
