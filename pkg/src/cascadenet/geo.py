"""Voronoi vulnerability maps and GeoJSON export.

Cells are built by intersecting, for every seed, the clip box with the
half-planes closer to that seed than to each other seed.  Distances are
plain Euclidean in (lat, lon) degree space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError
from .interdep import GeoGrid
from .model import ComponentId

DUPLICATE_JITTER = 1e-9


@dataclass(frozen=True)
class VoronoiCell:
    seed: ComponentId
    polygon: tuple  # closed ring of (lat, lon)
    value: float | None = None

    @property
    def area(self) -> float:
        return polygon_area(self.polygon)

    def with_value(self, value: float) -> "VoronoiCell":
        return VoronoiCell(self.seed, self.polygon, float(value))


def polygon_area(ring) -> float:
    """Absolute shoelace area of a ring (closed or open)."""
    pts = np.asarray(ring, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _clip(poly, normal, offset):
    # keep points p with normal . p <= offset
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = normal @ p - offset
        fq = normal @ q - offset
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append(p + s * (q - p))
    return out


def _dedupe_seeds(points, ids):
    pts = points.copy()
    seen = {}
    for i, key in enumerate(map(tuple, points)):
        if key in seen:
            cid = ids[i]
            rng = np.random.default_rng([cid.infra, cid.local, seen[key]])
            angle = rng.uniform(0, 2 * np.pi)
            pts[i] += DUPLICATE_JITTER * np.array([np.cos(angle), np.sin(angle)])
            seen[key] += 1
        else:
            seen[key] = 1
    return pts


def voronoi_partition(seeds: Sequence[tuple], clip_box: tuple) -> list[VoronoiCell]:
    """Voronoi cells of ``(id, lat, lon)`` seeds clipped to ``(min_lat, min_lon, max_lat, max_lon)``.

    Vertices run counter-clockwise in (lon, lat) order; rings are closed.
    """
    if not seeds:
        raise ContractError("Voronoi partition needs at least one seed")
    lat0, lon0, lat1, lon1 = map(float, clip_box)
    if not (lat0 < lat1 and lon0 < lon1):
        raise ContractError(f"degenerate clip box {clip_box}")
    ids = [s[0] for s in seeds]
    pts = np.array([(float(s[1]), float(s[2])) for s in seeds])
    if np.any(pts[:, 0] < lat0) or np.any(pts[:, 0] > lat1) or np.any(pts[:, 1] < lon0) or np.any(pts[:, 1] > lon1):
        raise ContractError("clip box must contain every seed")
    pts = _dedupe_seeds(pts, ids)
    # counter-clockwise when read as (lon, lat); clipping keeps the orientation
    box = [np.array(v) for v in ((lat0, lon0), (lat0, lon1), (lat1, lon1), (lat1, lon0))]
    cells = []
    for i, p in enumerate(pts):
        poly = box
        for j, q in enumerate(pts):
            if i == j:
                continue
            normal = q - p
            poly = _clip(poly, normal, normal @ (p + q) / 2.0)
            if not poly:
                break
        ring = tuple((float(a), float(b)) for a, b in poly)
        cells.append(VoronoiCell(ids[i], ring + ring[:1]))
    return cells


def export_geojson(
    cells: Sequence[VoronoiCell],
    layer: str,
    scenario: str,
    iteration: int,
    infra_names: Mapping[int, str] | None = None,
) -> dict:
    """FeatureCollection of Polygon features in (lon, lat) order."""
    features = []
    for cell in cells:
        props = {
            "infra": cell.seed.infra,
            "node_id": cell.seed.local,
            "value": cell.value,
            "scenario": scenario,
            "iteration": iteration,
            "layer": layer,
        }
        if infra_names:
            props["infra_name"] = infra_names.get(cell.seed.infra)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [[[lon, lat] for lat, lon in cell.polygon]]},
                "properties": props,
            }
        )
    return {"type": "FeatureCollection", "features": features}


def dumps_geojson(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def grid_geojson(grid: GeoGrid, clip_box: tuple) -> dict:
    """Grid overlay as LineString features covering ``clip_box``."""
    lat0, lon0, lat1, lon1 = clip_box
    h = grid.cell_size
    olat, olon = grid.origin
    feats = []
    r = np.ceil((lat0 - olat) / h)
    while olat + r * h <= lat1 + 1e-12:
        lat = olat + r * h
        feats.append(_line([[lon0, lat], [lon1, lat]], "row", int(r)))
        r += 1
    c = np.ceil((lon0 - olon) / h)
    while olon + c * h <= lon1 + 1e-12:
        lon = olon + c * h
        feats.append(_line([[lon, lat0], [lon, lat1]], "col", int(c)))
        c += 1
    return {"type": "FeatureCollection", "features": feats}


def _line(coords, axis, index):
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": [[float(x), float(y)] for x, y in coords]},
        "properties": {"axis": axis, "index": index},
    }


def values_csv(cells: Sequence[VoronoiCell]) -> str:
    lines = ["infra,node,value"]
    lines += [f"{c.seed.infra},{c.seed.local},{c.value!r}" for c in cells]
    return "\n".join(lines) + "\n"


def network_cells(network, clip_box: tuple, values: Mapping | None = None, levels=None) -> list[VoronoiCell]:
    """Voronoi cells seeded by the nodes of ``levels`` (default: the terminal level).

    ``values`` maps node ids to a scalar (e.g. ``P(T)``) or to a curve with a
    ``final`` attribute.
    """
    levels = {network.num_levels} if levels is None else {network.level_index(v) for v in levels}
    nodes = network.nodes_in_levels(levels)
    if not nodes:
        raise ContractError(f"{network.name}: no nodes on levels {sorted(levels)}")
    cells = voronoi_partition([(n.id, n.lat, n.lon) for n in nodes], clip_box)
    if values is None:
        return cells
    out = []
    for c in cells:
        v = values[c.seed]
        out.append(c.with_value(getattr(v, "final", v)))
    return out
