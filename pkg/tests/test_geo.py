import json

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import MultiPoint, Point, box, shape

from cascadenet.cascade import Scenario, SimConfig, calculate_vulnerability
from cascadenet.errors import ContractError
from cascadenet.geo import (
    dumps_geojson,
    export_geojson,
    grid_geojson,
    network_cells,
    polygon_area,
    voronoi_partition,
)
from cascadenet.model import ComponentId

UNIT = (0.0, 0.0, 1.0, 1.0)


def cid(i):
    return ComponentId(1, i)


def seeds_from(points):
    return [(cid(i + 1), float(a), float(b)) for i, (a, b) in enumerate(points)]


def to_xy(cell):
    # shapely geometry in (lon, lat)
    return shapely.Polygon([(lon, lat) for lat, lon in cell.polygon])


def test_one_seed_is_the_box():
    (cell,) = voronoi_partition([(cid(1), 0.3, 0.6)], UNIT)
    assert cell.area == pytest.approx(1.0)
    assert cell.polygon[0] == cell.polygon[-1]


def test_two_seeds_split_on_bisector():
    a, b = voronoi_partition([(cid(1), 0.5, 0.25), (cid(2), 0.5, 0.75)], UNIT)
    assert a.area == pytest.approx(0.5) and b.area == pytest.approx(0.5)
    assert max(lon for _, lon in a.polygon) == pytest.approx(0.5)


def test_unit_square_corners():
    corners = [(0, 0), (0, 1), (1, 0), (1, 1)]
    cells = voronoi_partition(seeds_from(corners), UNIT)
    assert [c.area for c in cells] == pytest.approx([0.25] * 4)


def test_errors():
    with pytest.raises(ContractError):
        voronoi_partition([], UNIT)
    with pytest.raises(ContractError):
        voronoi_partition([(cid(1), 2.0, 0.5)], UNIT)


def test_duplicate_seeds_perturbed():
    cells = voronoi_partition([(cid(1), 0.5, 0.5), (cid(2), 0.5, 0.5)], UNIT)
    assert sum(c.area for c in cells) == pytest.approx(1.0, rel=1e-9)
    assert all(c.area > 0 for c in cells)


points = st.lists(st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 0.99)), min_size=1, max_size=30,
                  unique_by=lambda p: (round(p[0], 6), round(p[1], 6)))


@settings(max_examples=60, deadline=None)
@given(points)
def test_area_conservation(pts):
    cells = voronoi_partition(seeds_from(pts), UNIT)
    assert sum(c.area for c in cells) == pytest.approx(1.0, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(points)
def test_cells_valid_convex_and_disjoint(pts):
    polys = [to_xy(c) for c in voronoi_partition(seeds_from(pts), UNIT)]
    for p in polys:
        assert p.is_valid
        assert p.convex_hull.area == pytest.approx(p.area, abs=1e-12)
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            assert polys[i].intersection(polys[j]).area < 1e-9


def test_matches_independent_voronoi(rng):
    pts = rng.uniform(0.05, 0.95, (25, 2))
    cells = voronoi_partition(seeds_from(pts), UNIT)
    ref = shapely.voronoi_polygons(MultiPoint([(lon, lat) for lat, lon in pts]), extend_to=box(-1, -1, 2, 2))
    frame = box(0, 0, 1, 1)
    ref_cells = [g.intersection(frame) for g in ref.geoms]
    for (lat, lon), cell in zip(pts, cells):
        match = next(g for g in ref_cells if g.contains(Point(lon, lat)))
        assert cell.area == pytest.approx(match.area, rel=1e-9, abs=1e-12)


def test_nearest_seed_spot_check(rng):
    pts = rng.uniform(0, 1, (40, 2))
    cells = voronoi_partition(seeds_from(pts), UNIT)
    polys = [to_xy(c) for c in cells]
    probes = rng.uniform(0, 1, (1000, 2))
    for lat, lon in probes:
        nearest = int(np.argmin(np.hypot(pts[:, 0] - lat, pts[:, 1] - lon)))
        assert polys[nearest].buffer(1e-9).contains(Point(lon, lat))


def test_polygon_area_shoelace():
    assert polygon_area([(0, 0), (0, 2), (3, 2), (3, 0)]) == 6.0


def test_geojson_structure_and_parse():
    cells = [c.with_value(0.1 * i) for i, c in enumerate(voronoi_partition(seeds_from([(0.2, 0.3), (0.7, 0.8)]), UNIT))]
    doc = json.loads(dumps_geojson(export_geojson(cells, "comprehensive", "worst", 2, {1: "water"})))
    assert doc["type"] == "FeatureCollection" and len(doc["features"]) == 2
    for feat in doc["features"]:
        ring = feat["geometry"]["coordinates"][0]
        assert ring[0] == ring[-1]
        geom = shape(feat["geometry"])
        assert geom.is_valid
        # lon-lat order: x spans the longitude range of the box
        assert 0 <= geom.bounds[0] <= geom.bounds[2] <= 1
        assert shapely.is_ccw(geom.exterior)
        props = feat["properties"]
        assert set(props) >= {"infra", "node_id", "value", "scenario", "iteration", "layer"}


def test_grid_overlay(case_study, case_grid):
    bounds = case_grid.bounds(case_study.networks)
    doc = grid_geojson(case_grid, bounds)
    assert all(f["geometry"]["type"] == "LineString" for f in doc["features"])
    assert all(shape(f["geometry"]).is_valid for f in doc["features"])


def test_water_map_has_sixteen_cells(case_study, case_builder, case_grid):
    water = case_study.network("water")
    bounds = case_grid.bounds(case_study.networks)
    cells = network_cells(water, bounds)
    assert len(cells) == 16
    total = (bounds[2] - bounds[0]) * (bounds[3] - bounds[1])
    assert sum(c.area for c in cells) == pytest.approx(total, rel=1e-6)


def test_worst_layer_dominates_best(case_study, case_builder, case_grid):
    graph = case_builder(0.5)
    bounds = case_grid.bounds(case_study.networks)
    water = case_study.network("water")
    maps = {}
    for sc in (Scenario.BEST, Scenario.WORST):
        it = calculate_vulnerability(graph, SimConfig(case_study.importance, scenario=sc)).iterations[-1]
        maps[sc] = network_cells(water, bounds, it.comprehensive)
    for b, w in zip(maps[Scenario.BEST], maps[Scenario.WORST]):
        assert w.value >= b.value
