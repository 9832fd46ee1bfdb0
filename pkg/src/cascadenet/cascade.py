"""Comprehensive vulnerability of interdependent infrastructures over simulated days.

Each iteration evaluates the intra-infrastructure curves, induces
inter-infrastructure failure along interdependency edges (best / worst /
average supply scenario), mixes parent infrastructures with the relative
importance matrix and combines intra and inter failure by
inclusion-exclusion.  Node rates for the next day are the effective rates
of the comprehensive curves; arc rates stay fixed.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dft import intra_model
from .errors import ContractError
from .gates import DEFAULT_DORMANCY, HORIZON_HOURS, FailureCurve, effective_rate
from .interdep import InterdepEdge, InterdepGraph
from .model import ComponentId, ImportanceMatrix, sample_rates

LAYERS = ("intra", "inter", "comprehensive")


class Scenario(str, Enum):
    BEST = "best"
    WORST = "worst"
    AVERAGE = "average"


@dataclass(frozen=True)
class SimConfig:
    importance: ImportanceMatrix
    iterations: int = 1
    scenario: Scenario = Scenario.WORST
    gamma_threshold: float | None = None
    dormancy: float = DEFAULT_DORMANCY
    seed: int = 0
    horizon: int = HORIZON_HOURS

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.iterations < 1:
            raise ContractError(f"iterations must be >= 1, got {self.iterations}")
        if not 0.0 <= self.dormancy <= 1.0:
            raise ContractError(f"dormancy must lie in [0, 1], got {self.dormancy}")
        if self.gamma_threshold is not None and not 0.0 <= self.gamma_threshold <= 1.0:
            raise ContractError(f"Γ must lie in [0,1], got {self.gamma_threshold}")


def induced_vulnerability(edge: InterdepEdge, parent_fail: FailureCurve) -> FailureCurve:
    """Failure induced on the child along one edge: ``strength * P_parent``."""
    if not 0.0 < edge.strength <= 1.0:
        raise ContractError(f"edge strength must lie in (0, 1], got {edge.strength}")
    return parent_fail.scaled(edge.strength)


def scenario_aggregate(induced: Sequence[FailureCurve], scenario: Scenario) -> FailureCurve:
    """Collapse the curves induced by one parent infrastructure.

    ``induced`` must be ordered by parent id.  Best and worst pick the whole
    curve whose value at the horizon is smallest / largest (first one on
    ties); average is the pointwise mean.
    """
    if not induced:
        raise ContractError("scenario aggregation needs at least one induced curve")
    scenario = Scenario(scenario)
    if scenario is Scenario.AVERAGE:
        return FailureCurve(np.mean([c.probs for c in induced], axis=0))
    finals = [c.final for c in induced]
    pick = int(np.argmin(finals) if scenario is Scenario.BEST else np.argmax(finals))
    return induced[pick]


def mix_importance(
    per_parent_infra: Mapping[int, FailureCurve],
    importance: ImportanceMatrix,
    child_infra: int,
) -> FailureCurve:
    """``P_inter = sum_i R[i, k] * P^i`` over parent infrastructures of ``child_infra``."""
    parents = importance.parents(child_infra)
    missing = [i for i in parents if i not in per_parent_infra]
    if missing:
        raise ContractError(
            f"no induced curve for parent infrastructure(s) {missing} of {child_infra}"
        )
    if not parents:
        some = next(iter(per_parent_infra.values()), None)
        return FailureCurve.zeros(some.horizon if some else HORIZON_HOURS)
    probs = sum(importance.weight(i, child_infra) * per_parent_infra[i].probs for i in parents)
    return FailureCurve(probs)


def combine(intra: FailureCurve, inter: FailureCurve) -> FailureCurve:
    """``P_fail = P_intra + P_inter - P_intra * P_inter`` pointwise."""
    if intra.horizon != inter.horizon:
        raise ContractError("intra and inter curves have different horizons")
    a, b = intra.probs, inter.probs
    return FailureCurve(a + b - a * b)


@dataclass
class IterationResult:
    iteration: int
    intra: dict
    inter: dict
    comprehensive: dict
    # (child node, parent infrastructure) -> scenario-aggregated induced curve
    induced: dict = field(default_factory=dict)

    def layer(self, name: str) -> dict:
        if name not in LAYERS:
            raise ContractError(f"unknown layer {name!r}; expected one of {LAYERS}")
        return getattr(self, name)

    def infra_average(self, infra: int, layer: str = "comprehensive") -> float:
        vals = [c.final for cid, c in self.layer(layer).items() if cid.infra == infra]
        return float(np.mean(vals))

    def induced_average(self, parent: int, child: int) -> float | None:
        """Mean ``P^i(T)`` over child nodes that receive edges from ``parent``."""
        vals = [c.final for (cid, i), c in self.induced.items() if cid.infra == child and i == parent]
        return float(np.mean(vals)) if vals else None


def run_iteration(
    graph: InterdepGraph,
    rates: Mapping[ComponentId, float],
    config: SimConfig,
    iteration: int = 1,
) -> tuple[IterationResult, dict]:
    """One simulated day; returns the slice and the rates for the next day."""
    horizon = config.horizon
    intra: dict[ComponentId, FailureCurve] = {}
    for net in graph.networks:
        intra.update(intra_model(net, rates, config.dormancy, horizon))
    fail = dict(intra)

    induced: dict[tuple[ComponentId, int], FailureCurve] = {}
    inter: dict[ComponentId, FailureCurve] = {}
    zeros = FailureCurve.zeros(horizon)
    for net in graph.networks:
        k = net.index
        for node in net.nodes:
            by_parent = graph.parents(node.id)
            if not by_parent:
                inter[node.id] = zeros
                continue
            per_infra = {}
            for i, edges in sorted(by_parent.items()):
                curves = [induced_vulnerability(e, fail[e.source]) for e in edges]
                per_infra[i] = induced[(node.id, i)] = scenario_aggregate(curves, config.scenario)
            for i in config.importance.parents(k):
                # node takes no service from infrastructure i
                per_infra.setdefault(i, zeros)
            inter[node.id] = mix_importance(per_infra, config.importance, k)

    comprehensive = {cid: combine(intra[cid], inter[cid]) for cid in intra}
    next_rates = dict(rates)
    for cid, curve in comprehensive.items():
        next_rates[cid] = effective_rate(curve)
    return IterationResult(iteration, intra, inter, comprehensive, induced), next_rates


def initial_rates(graph: InterdepGraph, seed: int) -> dict:
    rates = {}
    for net in graph.networks:
        rates.update(sample_rates(net, seed))
    return rates


@dataclass
class VulnerabilityReport:
    config: SimConfig
    networks: tuple
    iterations: list

    @property
    def scenario(self) -> Scenario:
        return self.config.scenario

    def infra_averages(self, iteration: int | None = None, layer: str = "comprehensive") -> dict:
        """Average ``P(T)`` per infrastructure, for the 1-based ``iteration`` (default: last)."""
        it = self.iterations[(iteration or len(self.iterations)) - 1]
        return {net.index: it.infra_average(net.index, layer) for net in self.networks}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "infra", "node", "t", "intra", "inter", "comprehensive"])
        for it in self.iterations:
            for cid in sorted(it.intra):
                a, b, c = it.intra[cid], it.inter[cid], it.comprehensive[cid]
                for t in range(a.horizon):
                    w.writerow([it.iteration, cid.infra, cid.local, t + 1,
                                repr(float(a.probs[t])), repr(float(b.probs[t])),
                                repr(float(c.probs[t]))])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "infra", "name", "scenario", "intra", "inter", "comprehensive"])
        for it in self.iterations:
            for net in self.networks:
                w.writerow([it.iteration, net.index, net.name, self.scenario.value]
                           + [repr(it.infra_average(net.index, layer)) for layer in LAYERS])
        return buf.getvalue()


def calculate_vulnerability(
    graph: InterdepGraph,
    config: SimConfig,
    rates: Mapping[ComponentId, float] | None = None,
) -> VulnerabilityReport:
    """Run ``config.iterations`` days starting from rates sampled with ``config.seed``."""
    rates = initial_rates(graph, config.seed) if rates is None else dict(rates)
    results = []
    for m in range(1, config.iterations + 1):
        result, rates = run_iteration(graph, rates, config, m)
        results.append(result)
    return VulnerabilityReport(config, graph.networks, results)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    scenario: Scenario
    parent: int
    child: int
    value: float


def sweep_gamma(
    graph_builder: Callable[[float], InterdepGraph],
    gamma_values: Iterable[float],
    config: SimConfig,
    scenarios: Sequence[Scenario] | None = None,
    iteration: int = 1,
) -> list[SweepRow]:
    """Average induced ``P^i(T)`` of every (parent, child) pair versus Γ.

    Rows are ordered by Γ as given, then scenario, then pair.
    """
    scenarios = [Scenario(s) for s in (scenarios or [config.scenario])]
    rows = []
    for gamma in gamma_values:
        graph = graph_builder(gamma)
        pairs = sorted({(e.source.infra, e.target.infra) for e in graph.edges})
        for sc in scenarios:
            cfg = replace(config, scenario=sc, gamma_threshold=gamma, iterations=iteration)
            it = calculate_vulnerability(graph, cfg).iterations[iteration - 1]
            for parent, child in pairs:
                value = it.induced_average(parent, child)
                if value is not None:
                    rows.append(SweepRow(gamma, sc, parent, child, value))
    return rows


def gamma_monotonicity_violations(rows: Sequence[SweepRow], tol: float = 1e-12) -> list[str]:
    """Pairs whose best-case value drops or worst-case value rises as Γ grows."""
    series: dict[tuple, list[SweepRow]] = {}
    for r in rows:
        series.setdefault((r.scenario, r.parent, r.child), []).append(r)
    problems = []
    for (sc, parent, child), pts in sorted(series.items(), key=lambda kv: (kv[0][0].value, kv[0][1:])):
        pts = sorted(pts, key=lambda r: r.gamma)
        for lo, hi in zip(pts, pts[1:]):
            if sc is Scenario.BEST and hi.value < lo.value - tol:
                problems.append(f"best I{parent}->I{child}: Γ {lo.gamma}->{hi.gamma} fell {lo.value:.6g}->{hi.value:.6g}")
            if sc is Scenario.WORST and hi.value > lo.value + tol:
                problems.append(f"worst I{parent}->I{child}: Γ {lo.gamma}->{hi.gamma} rose {lo.value:.6g}->{hi.value:.6g}")
    return problems


def sweep_importance(
    graph_builder: Callable[[float], InterdepGraph],
    gamma_values: Iterable[float],
    importances: Mapping[str, ImportanceMatrix],
    config: SimConfig,
    scenarios: Sequence[Scenario] | None = None,
    iteration: int = 1,
) -> list[tuple]:
    """Rows ``(Γ, label, infra, scenario, average inter P(T))``."""
    scenarios = [Scenario(s) for s in (scenarios or [config.scenario])]
    rows = []
    for gamma in gamma_values:
        graph = graph_builder(gamma)
        for label, matrix in importances.items():
            for sc in scenarios:
                cfg = replace(config, importance=matrix, scenario=sc,
                              gamma_threshold=gamma, iterations=iteration)
                it = calculate_vulnerability(graph, cfg).iterations[iteration - 1]
                for net in graph.networks:
                    rows.append((gamma, label, net.index, sc.value, it.infra_average(net.index, "inter")))
    return rows
