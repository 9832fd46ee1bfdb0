"""Heuristic dynamic fault tree of one infrastructure and its evaluation.

For every node ``T`` above the first level, each parent ``S`` delivers
through the channel ``OR(S fails, arc S->T fails)``; the channels feed one
warm-spare gate (first parent is the primary) and the node's output fails
on ``OR(WSP(...), T fails)``.  Output events of parents are shared, so the
tree is really a DAG and evaluation memoizes by node identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import ContractError, ValidationError
from .gates import (
    DEFAULT_DORMANCY,
    HORIZON_HOURS,
    PAND_STEPS,
    FailureCurve,
    eval_and,
    eval_or,
    eval_pand_numeric,
    eval_voting_curves,
    eval_wsp_fold,
)
from .model import ComponentId, InfrastructureNetwork, topological_levels


class GateKind(str, Enum):
    BASIC = "BASIC"
    AND = "AND"
    OR = "OR"
    WSP = "WSP"
    PAND = "PAND"
    VOTING = "VOTING"


@dataclass(frozen=True, eq=False)
class DftNode:
    label: str
    kind: GateKind
    inputs: tuple = ()
    rate: float | None = None
    component: ComponentId | None = None
    dormancy: float = DEFAULT_DORMANCY
    k: int | None = None
    steps: int = PAND_STEPS

    def __post_init__(self):
        n = len(self.inputs)
        if self.kind is GateKind.BASIC:
            if self.rate is None or self.rate < 0 or n:
                raise ContractError(f"{self.label}: basic event needs a rate >= 0 and no inputs")
        elif self.kind is GateKind.PAND:
            if n != 2:
                raise ContractError(f"{self.label}: PAND takes exactly 2 inputs, got {n}")
        elif n < 2:
            raise ContractError(f"{self.label}: {self.kind.value} needs >= 2 inputs, got {n}")
        if self.kind is GateKind.VOTING and not (self.k and 1 <= self.k <= n):
            raise ContractError(f"{self.label}: VOTING needs 1 <= K <= {n}, got {self.k}")
        if not 0.0 <= self.dormancy <= 1.0:
            raise ContractError(f"{self.label}: dormancy must lie in [0, 1]")

    @classmethod
    def basic(cls, component: ComponentId, rate: float, label: str | None = None) -> "DftNode":
        return cls(label or str(component), GateKind.BASIC, rate=float(rate), component=component)

    @classmethod
    def gate(cls, kind: GateKind, inputs, label: str, **kw) -> "DftNode":
        return cls(label, GateKind(kind), tuple(inputs), **kw)


def _rate_of(rates: Mapping, cid: ComponentId) -> float:
    try:
        return rates[cid]
    except KeyError:
        raise ValidationError(f"no failure rate for component {cid}") from None


def build_dft(
    network: InfrastructureNetwork,
    rates: Mapping[ComponentId, float],
    dormancy: float = DEFAULT_DORMANCY,
) -> dict[ComponentId, DftNode]:
    """Root event ("output of node fails") for every node of ``network``."""
    levels = topological_levels(network)
    out: dict[ComponentId, DftNode] = {}
    for depth, members in enumerate(levels, start=1):
        for local in members:
            node = network.node(local)
            own = DftNode.basic(node.id, _rate_of(rates, node.id))
            if depth == 1:
                out[node.id] = own
                continue
            arcs = network.incoming(local)
            if not arcs:
                raise ValidationError(f"{network.name}: node {local} at level {depth} has no parents")
            channels = [
                DftNode.gate(
                    GateKind.OR,
                    (out[arc.source], DftNode.basic(arc.id, _rate_of(rates, arc.id))),
                    label=f"deliver {arc.source}->{node.id}",
                )
                for arc in arcs
            ]
            if len(channels) == 1:
                feed = channels[0]
            else:
                feed = DftNode.gate(
                    GateKind.WSP, channels, label=f"input {node.id}", dormancy=dormancy
                )
            out[node.id] = DftNode.gate(GateKind.OR, (feed, own), label=f"output {node.id}")
    return out


def evaluate(root: DftNode, horizon: int = HORIZON_HOURS, memo: dict | None = None) -> FailureCurve:
    """Failure curve of ``root``; shared sub-trees are computed once via ``memo``."""
    memo = {} if memo is None else memo
    stack = [root]
    while stack:
        node = stack[-1]
        if node in memo:
            stack.pop()
            continue
        pending = [c for c in node.inputs if c not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[node] = _eval_gate(node, [memo[c] for c in node.inputs], horizon)
    return memo[root]


def _eval_gate(node: DftNode, inputs, horizon) -> FailureCurve:
    kind = node.kind
    if kind is GateKind.BASIC:
        return FailureCurve.exponential(node.rate, horizon)
    if kind is GateKind.AND:
        acc = inputs[0]
        for c in inputs[1:]:
            acc = eval_and(acc, c)
        return acc
    if kind is GateKind.OR:
        acc = inputs[0]
        for c in inputs[1:]:
            acc = eval_or(acc, c)
        return acc
    if kind is GateKind.WSP:
        return eval_wsp_fold(inputs, node.dormancy)
    if kind is GateKind.VOTING:
        return eval_voting_curves(inputs, node.k)
    if kind is GateKind.PAND:
        ra, rb = (c.effective_rate for c in inputs)
        if ra <= 0 or rb <= 0:
            return FailureCurve.zeros(horizon)
        return eval_pand_numeric(ra, rb, horizon, node.steps)
    raise ContractError(f"unknown gate kind {kind}")


def intra_model(
    network: InfrastructureNetwork,
    rates: Mapping[ComponentId, float],
    dormancy: float = DEFAULT_DORMANCY,
    horizon: int = HORIZON_HOURS,
) -> dict[ComponentId, FailureCurve]:
    """Intra-infrastructure failure curve of every node."""
    roots = build_dft(network, rates, dormancy)
    memo: dict = {}
    return {cid: evaluate(root, horizon, memo) for cid, root in roots.items()}


def render_dft(root: DftNode) -> str:
    """Indented text dump, one event per line; repeated sub-trees are elided."""
    lines = []
    seen = set()

    def walk(node, depth):
        pad = "  " * depth
        if node.kind is GateKind.BASIC:
            lines.append(f"{pad}{node.label} [rate={node.rate:.6g}]")
            return
        extra = ""
        if node.kind is GateKind.WSP:
            extra = f" alpha={node.dormancy:g}"
        elif node.kind is GateKind.VOTING:
            extra = f" K={node.k}"
        if node in seen:
            lines.append(f"{pad}{node.kind.value} {node.label} (see above)")
            return
        seen.add(node)
        lines.append(f"{pad}{node.kind.value} {node.label}{extra}")
        for child in node.inputs:
            walk(child, depth + 1)

    walk(root, 0)
    return "\n".join(lines)
