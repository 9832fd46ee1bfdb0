"""Network of networks: geo-grid proximity edges between infrastructures.

Every node falls into a square grid cell.  An interdependency edge from a
parent-infrastructure node to a child-infrastructure node has strength
``1 / (cell distance + 1)`` and is kept when the strength reaches the
threshold.  A child node eligible under a dependency rule but left without
any edge from that parent infrastructure gets one fallback edge from its
nearest eligible parent node.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractError, ValidationError
from .model import ComponentId, DependencyRule, InfraNode, InfrastructureNetwork

DEFAULT_CELL_SIZE = 0.25


@dataclass(frozen=True)
class GeoGrid:
    origin: tuple[float, float] = (0.0, 0.0)  # (lat, lon) degrees
    cell_size: float = DEFAULT_CELL_SIZE

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ContractError(f"cell size must be positive, got {self.cell_size}")

    @classmethod
    def covering(cls, networks: Sequence[InfrastructureNetwork], cell_size=DEFAULT_CELL_SIZE):
        """Grid aligned to multiples of ``cell_size`` whose origin lies south-west of every node."""
        lats = [n.lat for net in networks for n in net.nodes]
        lons = [n.lon for net in networks for n in net.nodes]
        return cls(
            (math.floor(min(lats) / cell_size) * cell_size, math.floor(min(lons) / cell_size) * cell_size),
            cell_size,
        )

    def bounds(self, networks, pad_cells: int = 1):
        """(min_lat, min_lon, max_lat, max_lon) of the occupied cells, padded."""
        cells = [cell_of(n, self) for net in networks for n in net.nodes]
        r0 = min(c[0] for c in cells) - pad_cells
        r1 = max(c[0] for c in cells) + 1 + pad_cells
        c0 = min(c[1] for c in cells) - pad_cells
        c1 = max(c[1] for c in cells) + 1 + pad_cells
        lat0, lon0 = self.origin
        h = self.cell_size
        return (lat0 + r0 * h, lon0 + c0 * h, lat0 + r1 * h, lon0 + c1 * h)


@dataclass(frozen=True)
class InterdepEdge:
    source: ComponentId
    target: ComponentId
    strength: float
    fallback: bool = False


def cell_of(node: InfraNode, grid: GeoGrid) -> tuple[int, int]:
    """(row, col) grid cell containing ``node``."""
    lat0, lon0 = grid.origin
    return (
        math.floor((node.lat - lat0) / grid.cell_size),
        math.floor((node.lon - lon0) / grid.cell_size),
    )


def edge_strength(cell_a, cell_b) -> float:
    """``1 / (euclidean cell distance + 1)``, in ``(0, 1]``."""
    return 1.0 / (math.hypot(cell_a[0] - cell_b[0], cell_a[1] - cell_b[1]) + 1.0)


@dataclass(frozen=True)
class InterdepGraph:
    networks: tuple
    edges: tuple
    gamma_threshold: float
    grid: GeoGrid
    rules: tuple = ()
    _incoming: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        incoming: dict[ComponentId, dict[int, list[InterdepEdge]]] = {}
        for e in self.edges:
            incoming.setdefault(e.target, {}).setdefault(e.source.infra, []).append(e)
        object.__setattr__(self, "_incoming", incoming)

    def parents(self, child: ComponentId) -> dict[int, list[InterdepEdge]]:
        """Incoming edges of ``child`` grouped by parent infrastructure, sorted by parent id."""
        return self._incoming.get(child, {})

    def network(self, index: int) -> InfrastructureNetwork:
        return self.networks[index - 1]

    def edge_count(self, parent: int | None = None, child: int | None = None) -> int:
        return sum(
            1
            for e in self.edges
            if (parent is None or e.source.infra == parent)
            and (child is None or e.target.infra == child)
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["from_infra", "from_id", "to_infra", "to_id", "strength", "fallback"])
        for e in self.edges:
            w.writerow(
                [e.source.infra, e.source.local, e.target.infra, e.target.local,
                 repr(e.strength), int(e.fallback)]
            )
        return buf.getvalue()


def create_network(
    networks: Sequence[InfrastructureNetwork],
    rules: Sequence[DependencyRule],
    grid: GeoGrid,
    gamma: float,
) -> InterdepGraph:
    """Build the interdependency edges for threshold ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ContractError(f"Γ must lie in [0,1], got {gamma}")
    by_index = {net.index: net for net in networks}
    edges: dict[tuple[ComponentId, ComponentId], InterdepEdge] = {}

    def put(edge):
        key = (edge.source, edge.target)
        old = edges.get(key)
        if old is None or (old.fallback and not edge.fallback):
            edges[key] = edge

    for rule in rules:
        try:
            parent_net, child_net = by_index[rule.parent], by_index[rule.child]
        except KeyError:
            raise ValidationError(f"rule {rule} references an unknown infrastructure") from None
        parents = parent_net.nodes_in_levels(rule.parent_levels)
        if not parents:
            raise ValidationError(
                f"rule {parent_net.name}->{child_net.name}: no eligible parent nodes "
                f"in levels {sorted(rule.parent_levels)}"
            )
        parent_cells = [(p, cell_of(p, grid)) for p in parents]
        for child in child_net.nodes_in_levels(rule.child_levels):
            cc = cell_of(child, grid)
            best = None
            found = False
            for p, pc in parent_cells:
                g = edge_strength(pc, cc)
                if g >= gamma:
                    put(InterdepEdge(p.id, child.id, g))
                    found = True
                # parents iterate by ascending id, so ties keep the lowest id
                if best is None or g > best[1]:
                    best = (p, g)
            if not found:
                put(InterdepEdge(best[0].id, child.id, best[1], fallback=True))

    ordered = tuple(edges[k] for k in sorted(edges))
    return InterdepGraph(tuple(networks), ordered, float(gamma), grid, tuple(rules))
