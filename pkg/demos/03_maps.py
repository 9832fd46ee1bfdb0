# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Vulnerability maps
#
# The region is split into Voronoi cells around the terminal nodes of one
# infrastructure; each cell carries that node's comprehensive failure
# probability at hour 24.  The GeoJSON output opens in any GIS tool.

# %%
from pathlib import Path

from cascadenet import GeoGrid, Scenario, SimConfig, calculate_vulnerability, create_network
from cascadenet.geo import dumps_geojson, export_geojson, network_cells
from cascadenet.synthetic import load_case_study

model = load_case_study()
grid = GeoGrid.covering(model.networks)
clip = grid.bounds(model.networks)
graph = create_network(model.networks, model.rules, grid, 0.5)
water = model.network("water")

# %% [markdown]
# Best and worst case side by side: every cell is at least as vulnerable in
# the worst case.

# %%
out = Path("maps")
out.mkdir(exist_ok=True)
for sc in (Scenario.BEST, Scenario.WORST):
    it = calculate_vulnerability(graph, SimConfig(model.importance, scenario=sc, iterations=3, seed=7)).iterations[-1]
    cells = network_cells(water, clip, it.comprehensive)
    doc = export_geojson(cells, "comprehensive", sc.value, it.iteration, {water.index: water.name})
    (out / f"water_{sc.value}.geojson").write_text(dumps_geojson(doc))
    vals = sorted(round(c.value, 3) for c in cells)
    print(sc.value, len(cells), "cells; min/median/max", vals[0], vals[len(vals) // 2], vals[-1])

# %% [markdown]
# The cells tile the clip box exactly.

# %%
box_area = (clip[2] - clip[0]) * (clip[3] - clip[1])
print(sum(c.area for c in cells) / box_area)
