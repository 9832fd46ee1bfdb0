"""Infrastructure network model: domain types, config loading, rate sampling.

An infrastructure is a leveled multipartite DAG.  Nodes carry a level index
``1..l`` and geo-coordinates; arcs always run from level ``b`` to ``b + 1``.
Both nodes and arcs are basic failure events with their own rate
distribution.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import jsonschema
import networkx as nx
import numpy as np

from .errors import ConfigError, ValidationError

log = logging.getLogger(__name__)

RATE_FLOOR = 1e-6

IMPORTANCE_PRESETS = {
    "R1": [[0.0, 1.0, 0.5], [1.0, 0.0, 0.5], [0.0, 0.0, 0.0]],
    "R2": [[0.0, 1.0, 0.3], [1.0, 0.0, 0.7], [0.0, 0.0, 0.0]],
    "R3": [[0.0, 1.0, 0.7], [1.0, 0.0, 0.3], [0.0, 0.0, 0.0]],
}


class Kind(str, Enum):
    NODE = "node"
    ARC = "arc"


class ComponentId(NamedTuple):
    infra: int
    local: int
    kind: Kind = Kind.NODE

    def __str__(self):
        tag = "n" if self.kind is Kind.NODE else "a"
        return f"I{self.infra}:{tag}{self.local}"


@dataclass(frozen=True)
class RateSpec:
    mean: float
    std: float = 0.0

    def __post_init__(self):
        if not (self.mean >= 0 and self.std >= 0):
            raise ValidationError(f"rate mean/std must be non-negative, got {self}")


@dataclass(frozen=True)
class InfraNode:
    id: ComponentId
    level: int
    lat: float
    lon: float
    rate: RateSpec
    label: str = ""


@dataclass(frozen=True)
class InfraArc:
    id: ComponentId
    source: ComponentId
    target: ComponentId
    rate: RateSpec


@dataclass(frozen=True)
class InfrastructureNetwork:
    index: int
    name: str
    nodes: tuple[InfraNode, ...]
    arcs: tuple[InfraArc, ...]
    level_names: tuple[str, ...]
    _by_local: dict = field(init=False, repr=False, compare=False)
    _in_arcs: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id.local)))
        object.__setattr__(self, "arcs", tuple(sorted(self.arcs, key=lambda a: a.id.local)))
        object.__setattr__(self, "level_names", tuple(self.level_names))
        object.__setattr__(self, "_by_local", {n.id.local: n for n in self.nodes})
        incoming: dict[int, list[InfraArc]] = {}
        for arc in self.arcs:
            incoming.setdefault(arc.target.local, []).append(arc)
        for arcs in incoming.values():
            arcs.sort(key=lambda a: (a.source.local, a.id.local))
        object.__setattr__(self, "_in_arcs", incoming)

    @property
    def num_levels(self) -> int:
        return len(self.level_names)

    def node(self, local: int) -> InfraNode:
        return self._by_local[local]

    def incoming(self, local: int) -> list[InfraArc]:
        """Arcs feeding node ``local``, ordered by parent id."""
        return list(self._in_arcs.get(local, ()))

    def nodes_in_levels(self, levels: Iterable[int]) -> list[InfraNode]:
        wanted = set(levels)
        return [n for n in self.nodes if n.level in wanted]

    def level_index(self, level) -> int:
        """Resolve a level given as 1-based index or level name."""
        if isinstance(level, str):
            try:
                return self.level_names.index(level) + 1
            except ValueError:
                raise ValidationError(
                    f"{self.name}: unknown level {level!r}; known {list(self.level_names)}"
                ) from None
        return int(level)

    def components(self) -> list[ComponentId]:
        """Stable ordering: nodes by local id, then arcs by local id."""
        return [n.id for n in self.nodes] + [a.id for a in self.arcs]

    def validate(self) -> None:
        problems = []
        seen = set()
        for n in self.nodes:
            if n.id in seen:
                problems.append(f"duplicate node id {n.id.local}")
            seen.add(n.id)
            if n.id.infra != self.index or n.id.kind is not Kind.NODE:
                problems.append(f"node {n.id} does not belong to infrastructure {self.index}")
            if not 1 <= n.level <= self.num_levels:
                problems.append(f"node {n.id.local} has level {n.level} outside 1..{self.num_levels}")
            if not (math.isfinite(n.lat) and math.isfinite(n.lon)):
                problems.append(f"node {n.id.local} has non-finite coordinates")
        if problems:
            raise ValidationError(f"{self.name}: invalid nodes", problems)

        bad_arcs = []
        arc_ids = set()
        for a in self.arcs:
            if a.id in arc_ids:
                bad_arcs.append(f"arc {a.id.local}: duplicate id")
            arc_ids.add(a.id)
            src = self._by_local.get(a.source.local)
            dst = self._by_local.get(a.target.local)
            if src is None or dst is None:
                bad_arcs.append(f"arc {a.id.local}: unknown endpoint {a.source.local}->{a.target.local}")
            elif src.level + 1 != dst.level:
                bad_arcs.append(
                    f"arc {a.id.local}: {a.source.local}(level {src.level}) -> "
                    f"{a.target.local}(level {dst.level})"
                )
        if bad_arcs:
            raise ValidationError(f"{self.name}: arcs violate the level ordering", bad_arcs)

        has_out = {a.source.local for a in self.arcs}
        has_in = {a.target.local for a in self.arcs}
        dangling = [
            f"node {n.id.local} (level {n.level}) has no incoming arc"
            for n in self.nodes
            if n.level > 1 and n.id.local not in has_in
        ] + [
            f"node {n.id.local} (level {n.level}) has no outgoing arc"
            for n in self.nodes
            if n.level < self.num_levels and n.id.local not in has_out
        ]
        if dangling:
            raise ValidationError(f"{self.name}: broken flow", dangling)

    def to_digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(n.id.local for n in self.nodes)
        g.add_edges_from((a.source.local, a.target.local) for a in self.arcs)
        return g


@dataclass(frozen=True)
class DependencyRule:
    """Nodes of ``child`` in ``child_levels`` need service from ``parent``."""

    parent: int
    child: int
    parent_levels: frozenset
    child_levels: frozenset


@dataclass(frozen=True, eq=False)
class ImportanceMatrix:
    """Column-stochastic relative importance ``R``; ``R[i, k]`` weighs parent i for child k."""

    entries: np.ndarray

    def __post_init__(self):
        r = np.array(self.entries, dtype=float)
        if r.ndim != 2 or r.shape[0] != r.shape[1]:
            raise ValidationError(f"importance matrix must be square, got shape {r.shape}")
        r.setflags(write=False)
        object.__setattr__(self, "entries", r)

    @property
    def s(self) -> int:
        return self.entries.shape[0]

    def weight(self, parent: int, child: int) -> float:
        """Weight of parent infrastructure ``parent`` for ``child`` (1-based)."""
        return float(self.entries[parent - 1, child - 1])

    def parents(self, child: int) -> list[int]:
        col = self.entries[:, child - 1]
        return [i + 1 for i in np.flatnonzero(col > 0)]

    @classmethod
    def preset(cls, name: str) -> "ImportanceMatrix":
        try:
            return cls(np.array(IMPORTANCE_PRESETS[name]))
        except KeyError:
            raise ConfigError("importance", f"unknown preset {name!r}") from None

    def __eq__(self, other):
        return isinstance(other, ImportanceMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())


class Model(NamedTuple):
    networks: list
    rules: list
    importance: ImportanceMatrix

    def network(self, key) -> InfrastructureNetwork:
        """Look up a network by 1-based index or name."""
        for net in self.networks:
            if net.index == key or net.name == key:
                return net
        raise ValidationError(
            f"unknown infrastructure {key!r}; known: {[n.name for n in self.networks]}"
        )


class ImportanceNormalizationWarning(UserWarning):
    pass


_RATE = {
    "type": "object",
    "required": ["mean"],
    "properties": {
        "mean": {"type": "number", "minimum": 0},
        "std": {"type": "number", "minimum": 0},
    },
}
_LEVEL_REF = {"anyOf": [{"type": "integer", "minimum": 1}, {"type": "string"}]}
_INFRA_REF = {"anyOf": [{"type": "integer", "minimum": 1}, {"type": "string"}]}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["infrastructures"],
    "properties": {
        "infrastructures": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "levels", "nodes"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "levels": {"type": "array", "minItems": 1, "items": {"type": "string"}},
                    "nodes": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["id", "level", "lat", "lon", "rate"],
                            "properties": {
                                "id": {"type": "integer", "minimum": 0},
                                "level": _LEVEL_REF,
                                "lat": {"type": "number"},
                                "lon": {"type": "number"},
                                "rate": _RATE,
                                "label": {"type": "string"},
                            },
                        },
                    },
                    "arcs": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["id", "from", "to", "rate"],
                            "properties": {
                                "id": {"type": "integer", "minimum": 0},
                                "from": {"type": "integer", "minimum": 0},
                                "to": {"type": "integer", "minimum": 0},
                                "rate": _RATE,
                            },
                        },
                    },
                },
            },
        },
        "dependency_rules": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["parent", "child"],
                "properties": {
                    "parent": _INFRA_REF,
                    "child": _INFRA_REF,
                    "parent_levels": {"type": "array", "minItems": 1, "items": _LEVEL_REF},
                    "child_levels": {"type": "array", "minItems": 1, "items": _LEVEL_REF},
                },
            },
        },
        "importance": {
            "anyOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            ]
        },
    },
}


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _rate(doc) -> RateSpec:
    return RateSpec(float(doc["mean"]), float(doc.get("std", 0.0)))


def _parse_network(index: int, doc: Mapping) -> InfrastructureNetwork:
    level_names = tuple(doc["levels"])
    nodes = []
    for pos, nd in enumerate(doc["nodes"]):
        level = nd["level"]
        if isinstance(level, str):
            if level not in level_names:
                raise ConfigError(
                    f"infrastructures[{index - 1}].nodes[{pos}].level",
                    f"unknown level {level!r}",
                )
            level = level_names.index(level) + 1
        nodes.append(
            InfraNode(
                id=ComponentId(index, int(nd["id"])),
                level=int(level),
                lat=float(nd["lat"]),
                lon=float(nd["lon"]),
                rate=_rate(nd["rate"]),
                label=nd.get("label", ""),
            )
        )
    arcs = [
        InfraArc(
            id=ComponentId(index, int(ad["id"]), Kind.ARC),
            source=ComponentId(index, int(ad["from"])),
            target=ComponentId(index, int(ad["to"])),
            rate=_rate(ad["rate"]),
        )
        for ad in doc.get("arcs", [])
    ]
    net = InfrastructureNetwork(index, doc["name"], tuple(nodes), tuple(arcs), level_names)
    net.validate()
    return net


def _resolve_infra(ref, networks, path) -> int:
    for net in networks:
        if ref == net.index or ref == net.name:
            return net.index
    raise ConfigError(path, f"unknown infrastructure {ref!r}")


def _resolve_levels(refs, net, path) -> frozenset:
    if refs is None:
        return frozenset(range(1, net.num_levels + 1))
    out = set()
    for ref in refs:
        try:
            lv = net.level_index(ref)
        except ValidationError as exc:
            raise ConfigError(path, str(exc)) from None
        if not 1 <= lv <= net.num_levels:
            raise ConfigError(path, f"level {ref!r} outside 1..{net.num_levels} of {net.name}")
        out.add(lv)
    return frozenset(out)


def normalize_importance(raw, rules: Sequence[DependencyRule], s: int) -> ImportanceMatrix:
    """Validate ``R`` against the dependency rules and rescale parent columns to sum 1."""
    r = np.array(raw, dtype=float)
    if r.shape != (s, s):
        raise ValidationError(f"importance matrix must be {s}x{s}, got {r.shape}")
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ValidationError("importance entries must be finite and non-negative")
    if np.any(np.diag(r) != 0):
        raise ValidationError("importance matrix must have a zero diagonal")
    children = sorted({rule.child for rule in rules})
    for k in children:
        col = r[:, k - 1]
        total = col.sum()
        if total == 0:
            parents = sorted({rule.parent for rule in rules if rule.child == k})
            raise ValidationError(
                f"importance column for infrastructure {k} is all zeros "
                f"although it depends on {parents}"
            )
        if abs(total - 1.0) > 1e-12:
            warnings.warn(
                f"importance column {k} sums to {total:g}; normalized to 1",
                ImportanceNormalizationWarning,
                stacklevel=3,
            )
            r[:, k - 1] = col / total
    return ImportanceMatrix(r)


def load_model(document) -> Model:
    """Parse and validate a model from a mapping or JSON text.

    Raises
    ------
    ConfigError
        The document does not match :data:`CONFIG_SCHEMA`; the message names the path.
    ValidationError
        A structural invariant is violated (level ordering, zero importance column, ...).
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"not valid JSON: {exc}") from None
    try:
        jsonschema.validate(document, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(_json_path(exc.absolute_path), exc.message) from None

    networks = [
        _parse_network(i, doc) for i, doc in enumerate(document["infrastructures"], start=1)
    ]
    names = [n.name for n in networks]
    if len(set(names)) != len(names):
        raise ValidationError("infrastructure names must be unique", names)

    rules = []
    for pos, rd in enumerate(document.get("dependency_rules", [])):
        path = f"dependency_rules[{pos}]"
        parent = _resolve_infra(rd["parent"], networks, path + ".parent")
        child = _resolve_infra(rd["child"], networks, path + ".child")
        if parent == child:
            raise ValidationError(f"{path}: an infrastructure cannot depend on itself")
        rules.append(
            DependencyRule(
                parent,
                child,
                _resolve_levels(rd.get("parent_levels"), networks[parent - 1], path + ".parent_levels"),
                _resolve_levels(rd.get("child_levels"), networks[child - 1], path + ".child_levels"),
            )
        )

    s = len(networks)
    raw = document.get("importance")
    if raw is None:
        # uniform over declared parents
        raw = np.zeros((s, s))
        for rule in rules:
            raw[rule.parent - 1, rule.child - 1] = 1.0
        sums = raw.sum(axis=0)
        raw = np.divide(raw, sums, out=raw, where=sums > 0)
    elif isinstance(raw, str):
        raw = ImportanceMatrix.preset(raw).entries
    return Model(networks, rules, normalize_importance(raw, rules, s))


def read_model(path) -> Model:
    path = Path(path)
    return load_model(path.read_text(encoding="utf-8"))


def _rate_doc(rate: RateSpec) -> dict:
    return {"mean": rate.mean, "std": rate.std}


def dump_model(model: Model) -> dict:
    """Inverse of :func:`load_model`; reloading the result yields an identical model."""
    infra_docs = []
    for net in model.networks:
        infra_docs.append(
            {
                "name": net.name,
                "levels": list(net.level_names),
                "nodes": [
                    {
                        "id": n.id.local,
                        "level": n.level,
                        "lat": n.lat,
                        "lon": n.lon,
                        "rate": _rate_doc(n.rate),
                        **({"label": n.label} if n.label else {}),
                    }
                    for n in net.nodes
                ],
                "arcs": [
                    {
                        "id": a.id.local,
                        "from": a.source.local,
                        "to": a.target.local,
                        "rate": _rate_doc(a.rate),
                    }
                    for a in net.arcs
                ],
            }
        )
    return {
        "infrastructures": infra_docs,
        "dependency_rules": [
            {
                "parent": r.parent,
                "child": r.child,
                "parent_levels": sorted(r.parent_levels),
                "child_levels": sorted(r.child_levels),
            }
            for r in model.rules
        ],
        "importance": model.importance.entries.tolist(),
    }


def load_network_csv(nodes_csv, arcs_csv, index: int, name: str, level_names=None):
    """Build a network from node (id, level, lat, lon, mean, std) and
    arc (id, from, to, mean, std) CSV files."""
    with open(nodes_csv, newline="", encoding="utf-8") as fh:
        node_rows = list(csv.DictReader(fh))
    arc_rows = []
    if arcs_csv is not None:
        with open(arcs_csv, newline="", encoding="utf-8") as fh:
            arc_rows = list(csv.DictReader(fh))
    try:
        nodes = [
            InfraNode(
                ComponentId(index, int(r["id"])),
                int(r["level"]),
                float(r["lat"]),
                float(r["lon"]),
                RateSpec(float(r["mean"]), float(r.get("std") or 0.0)),
            )
            for r in node_rows
        ]
        arcs = [
            InfraArc(
                ComponentId(index, int(r["id"]), Kind.ARC),
                ComponentId(index, int(r["from"])),
                ComponentId(index, int(r["to"])),
                RateSpec(float(r["mean"]), float(r.get("std") or 0.0)),
            )
            for r in arc_rows
        ]
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(nodes_csv), f"malformed CSV row: {exc}") from None
    if level_names is None:
        depth = max((n.level for n in nodes), default=1)
        level_names = [f"level{i}" for i in range(1, depth + 1)]
    net = InfrastructureNetwork(index, name, tuple(nodes), tuple(arcs), tuple(level_names))
    net.validate()
    return net


def sample_rates(network: InfrastructureNetwork, seed: int) -> dict:
    """Draw one rate per component from ``Normal(mean, std)``, floored at :data:`RATE_FLOOR`.

    Draws are independent per component and taken in :meth:`components`
    order from a stream keyed by ``(seed, network.index)``, so shifting every
    mean moves each rate by the same amount (common random numbers).
    """
    rng = np.random.default_rng([int(seed), int(network.index)])
    comps = network.components()
    z = rng.standard_normal(len(comps))
    specs = [n.rate for n in network.nodes] + [a.rate for a in network.arcs]
    return {
        cid: max(spec.mean + spec.std * float(zi), RATE_FLOOR)
        for cid, spec, zi in zip(comps, specs, z)
    }


def topological_levels(network: InfrastructureNetwork) -> list[list[int]]:
    """Node ids grouped by declared level ``B_1..B_l``.

    Raises :class:`ValidationError` if any arc skips or reverses a level.
    """
    net_levels = {n.id.local: n.level for n in network.nodes}
    bad = [
        f"arc {a.id.local}: {a.source.local}->{a.target.local}"
        for a in network.arcs
        if net_levels.get(a.target.local) != net_levels.get(a.source.local, -2) + 1
    ]
    if bad:
        raise ValidationError(f"{network.name}: arcs violate the level ordering", bad)
    groups = [[] for _ in range(network.num_levels)]
    for n in network.nodes:
        groups[n.level - 1].append(n.id.local)
    return [sorted(g) for g in groups]


def infer_levels(network: InfrastructureNetwork) -> dict[int, int]:
    """Levels implied by arc direction (longest path from a source, 1-based).

    Only used to cross-check the declared levels.
    """
    g = network.to_digraph()
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise ValidationError(f"{network.name}: arcs form a cycle", cycle)
    depth = {}
    for v in nx.topological_sort(g):
        preds = list(g.predecessors(v))
        depth[v] = 1 + max((depth[p] for p in preds), default=0)
    return depth
