"""Monte Carlo ground truth for the gate formulas and small networks.

Failure times are sampled as ``E / rate`` with ``E ~ Exp(1)``, so runs that
share a seed share their uniforms (common random numbers) and a rate
increase can only move failures earlier.  Sampling runs in batches whose
sub-seeds are spawned deterministically from the user seed.

Warm spares follow an exposure clock: a spare whose isolated life is ``X``
fails dormant at ``X / alpha`` if that comes before activation at time
``a``; otherwise it fails at ``a + X - alpha * a``.  For exponential ``X``
this is the dormant-then-active semantics of the closed form.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gates import (
    HORIZON_HOURS,
    PAND_STEPS,
    FailureCurve,
    eval_pand_numeric,
    eval_voting_curves,
    eval_wsp_fold,
    pand_analytic,
    wsp_spare_cdf,
)
from .model import ComponentId, InfrastructureNetwork, topological_levels
from .errors import ContractError

BATCH = 1 << 19
MIN_SAMPLES = 1000
GATES = ("and", "or", "pand", "voting", "wsp")


@dataclass(frozen=True)
class McEstimate:
    probability: float
    std_error: float
    samples: int

    @classmethod
    def from_hits(cls, hits: int, n: int) -> "McEstimate":
        p = hits / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), n)

    def within(self, value: float, k: float = 3.0) -> bool:
        """``|p_hat - value| <= k * SE``; a zero SE is widened to ``1/n``."""
        return abs(self.probability - value) <= k * max(self.std_error, 1.0 / self.samples)


def _batches(n: int, seed: int):
    if n < 1:
        raise ContractError("sample count must be positive")
    sizes = [BATCH] * (n // BATCH) + ([n % BATCH] if n % BATCH else [])
    for child, size in zip(np.random.SeedSequence(seed).spawn(len(sizes)), sizes):
        yield np.random.default_rng(child), size


def _times(rng, rates, size):
    e = rng.standard_exponential((len(rates), size))
    r = np.asarray(rates, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        return np.where(r > 0, e / np.where(r > 0, r, 1.0), np.inf)


def _spare_times(active_until, spare_life, alpha):
    # spare fails dormant before activation, else after its remaining life
    dormant = spare_life < alpha * active_until
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dormant, spare_life / alpha, spare_life + (1.0 - alpha) * active_until)


def _warm_spare_chain(primary, spares, alpha):
    out = primary
    for s in spares:
        out = np.maximum(out, s + (1.0 - alpha) * out)
    return out


def _output_times(kind, rates, alpha, k, rng, size):
    t = _times(rng, rates, size)
    if kind == "and":
        return t.max(axis=0)
    if kind == "or":
        return t.min(axis=0)
    if kind == "pand":
        return np.where(t[0] < t[1], t[1], np.inf)
    if kind == "voting":
        return np.partition(t, k - 1, axis=0)[k - 1]
    if kind == "wsp":
        return _warm_spare_chain(t[0], t[1:], alpha)
    if kind == "wsp_spare":
        return _spare_times(t[0], t[1], alpha)
    raise ContractError(f"unknown gate kind {kind!r}")


def _check_arity(kind, rates, k):
    m = len(rates)
    if kind in ("and", "or") and m < 2:
        raise ContractError(f"{kind.upper()} needs >= 2 inputs, got {m}")
    if kind in ("pand", "wsp", "wsp_spare") and m != 2:
        raise ContractError(f"{kind.upper()} takes exactly 2 inputs, got {m}")
    if kind == "voting" and not (k and 1 <= k <= m):
        raise ContractError(f"VOTING needs 1 <= K <= {m}, got {k}")


def _estimate(kind, rates, alpha, k, t, n, seed):
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    hits = np.zeros(ts.size, dtype=np.int64)
    for rng, size in _batches(n, seed):
        out = _output_times(kind, rates, alpha, k, rng, size)
        hits += (out[None, :] <= ts[:, None]).sum(axis=1)
    est = [McEstimate.from_hits(int(h), n) for h in hits]
    return est[0] if np.ndim(t) == 0 else est


def mc_gate(kind, rates, alpha=0.5, t=HORIZON_HOURS, n=10**6, seed=0, k=None):
    """Monte Carlo probability that the gate output has failed by ``t``.

    ``kind`` is one of ``and, or, pand, voting, wsp`` (``wsp`` takes the
    primary rate first).  ``t`` may be a sequence, in which case one
    estimate per time is returned from the same samples.
    """
    kind = kind.lower()
    if n < MIN_SAMPLES:
        raise ContractError(f"need at least {MIN_SAMPLES} samples, got {n}")
    _check_arity(kind, rates, k)
    return _estimate(kind, rates, alpha, k, t, n, seed)


def mc_spare_marginal(rate_primary, rate_spare, alpha=0.5, t=HORIZON_HOURS, n=10**6, seed=0):
    """Monte Carlo ``P(warm spare has failed by t)``."""
    return _estimate("wsp_spare", [rate_primary, rate_spare], alpha, None, t, n, seed)


def mc_wsp_multi(primary_rate, spare_rates, alpha=0.5, t=HORIZON_HOURS, n=10**6, seed=0):
    """Warm spare with sequential activation of ``spare_rates`` in order."""
    if n < MIN_SAMPLES:
        raise ContractError(f"need at least {MIN_SAMPLES} samples, got {n}")
    rates = [primary_rate, *spare_rates]
    return _estimate("wsp", rates, alpha, None, t, n, seed)


def mc_network(
    network: InfrastructureNetwork,
    rates: Mapping[ComponentId, float],
    alpha: float = 0.5,
    t: float = HORIZON_HOURS,
    n: int = 10**5,
    seed: int = 0,
) -> dict[ComponentId, McEstimate]:
    """Empirical intra-failure probability of every node by re-simulating the flow.

    A node's output fails when the node itself fails or when every parent
    delivery channel (parent output or its arc) has failed, the channels
    acting as warm spares in parent-id order.
    """
    comps = network.components()
    pos = {cid: i for i, cid in enumerate(comps)}
    rate_vec = [rates[c] for c in comps]
    levels = topological_levels(network)
    hits = {n_.id: 0 for n_ in network.nodes}
    for rng, size in _batches(n, seed):
        life = _times(rng, rate_vec, size)
        out = {}
        for depth, members in enumerate(levels, start=1):
            for local in members:
                node = network.node(local)
                own = life[pos[node.id]]
                if depth == 1:
                    out[node.id] = own
                    continue
                channels = [np.minimum(out[a.source], life[pos[a.id]]) for a in network.incoming(local)]
                feed = _warm_spare_chain(channels[0], channels[1:], alpha)
                out[node.id] = np.minimum(own, feed)
        for cid, times in out.items():
            hits[cid] += int((times <= t).sum())
    return {cid: McEstimate.from_hits(h, n) for cid, h in hits.items()}


@dataclass(frozen=True)
class BudgetRow:
    gate: str
    params: str
    t: float
    closed_form: float
    mc_estimate: float
    std_error: float
    normative: bool
    samples: int = 0

    @property
    def abs_diff(self) -> float:
        return abs(self.closed_form - self.mc_estimate)

    @property
    def passed(self) -> bool:
        # zero hits give a zero SE; fall back to the one-hit resolution 1/n
        floor = 1.0 / self.samples if self.samples else 0.0
        return self.abs_diff <= 3.0 * max(self.std_error, floor)


# Rate pairs drawn from the component tables (generators 0.003, buses 0.002,
# lines 0.007, water and supply levels 0.005 / 0.008 / 0.009 / 0.01, pipes and
# links 0.01) plus composite channel rates and a few stress values.
RATE_PAIRS = [
    (0.003, 0.007), (0.007, 0.003), (0.002, 0.007), (0.007, 0.002),
    (0.003, 0.002), (0.002, 0.003), (0.005, 0.010), (0.010, 0.005),
    (0.008, 0.010), (0.009, 0.010), (0.010, 0.010), (0.005, 0.008),
    (0.008, 0.009), (0.009, 0.005), (0.005, 0.005), (0.003, 0.003),
    (0.015, 0.030), (0.030, 0.015), (0.050, 0.020), (0.020, 0.050),
    (0.001, 0.001), (0.100, 0.100), (0.001, 0.050), (0.200, 0.010),
]
VOTING_SETS = [
    ((0.003, 0.007, 0.002), 1), ((0.003, 0.007, 0.002), 2), ((0.003, 0.007, 0.002), 3),
    ((0.005, 0.008, 0.009), 1), ((0.005, 0.008, 0.009), 2), ((0.005, 0.008, 0.009), 3),
    ((0.005, 0.008, 0.009, 0.01), 2), ((0.005, 0.008, 0.009, 0.01), 3),
    ((0.01, 0.01, 0.01, 0.01), 1), ((0.01, 0.01, 0.01, 0.01), 2), ((0.01, 0.01, 0.01, 0.01), 4),
    ((0.003, 0.002, 0.007, 0.01), 3), ((0.05, 0.02, 0.03), 2), ((0.05, 0.02, 0.03), 3),
    ((0.009, 0.005, 0.008, 0.01, 0.01), 3), ((0.009, 0.005, 0.008, 0.01, 0.01), 5),
    ((0.02, 0.04), 1), ((0.02, 0.04), 2), ((0.003, 0.003, 0.003, 0.003, 0.003, 0.003), 2),
    ((0.1, 0.05, 0.02, 0.01), 2), ((0.015, 0.015, 0.015), 2), ((0.007, 0.007), 1),
    ((0.03, 0.01, 0.02, 0.04, 0.05), 2), ((0.002, 0.002, 0.002), 1),
]
# (primary, spare, alpha); the first eight sit on the singular locus primary = (1 - alpha) spare
WSP_SETS = [
    (0.005, 0.010, 0.5), (0.003, 0.006, 0.5), (0.007, 0.010, 0.3), (0.0045, 0.009, 0.5),
    (0.010, 0.010, 0.0), (0.008, 0.010, 0.2), (0.002, 0.008, 0.75), (0.0063, 0.009, 0.3),
    (0.005, 0.008, 0.5), (0.003, 0.007, 0.5), (0.008, 0.009, 1.0), (0.003, 0.002, 0.5),
    (0.010, 0.010, 0.5), (0.009, 0.005, 0.5), (0.005, 0.009, 0.1), (0.008, 0.010, 0.9),
    (0.003, 0.007, 0.0), (0.007, 0.003, 0.25), (0.015, 0.030, 0.5), (0.050, 0.020, 0.5),
    (0.002, 0.007, 0.4), (0.010, 0.005, 0.8), (0.001, 0.050, 0.3), (0.100, 0.100, 0.5),
]
TIMES = (6.0, 12.0, 24.0)


def verify_gates(
    gates: Sequence[str] = GATES,
    n: int = 10**6,
    seed: int = 20240601,
    steps: int = PAND_STEPS,
    times: Sequence[float] = TIMES,
) -> list[BudgetRow]:
    """Closed forms versus Monte Carlo over the standard parameter grid.

    Rows marked non-normative (WSP joint output, multi-spare fold) are
    report-only: the closed form multiplies marginals of dependent inputs.
    """
    times = tuple(float(t) for t in times)
    rows: list[BudgetRow] = []

    def sub_seed(*key):
        return int(np.random.SeedSequence([seed, *key]).generate_state(1)[0])

    tgrid = np.asarray(times)
    gates = [g.lower() for g in gates]
    unknown = sorted(set(gates) - set(GATES))
    if unknown:
        raise ContractError(f"unknown gates {unknown}; choose from {GATES}")
    for gi, gate in enumerate(GATES):
        if gate not in gates:
            continue
        if gate in ("and", "or", "pand"):
            for si, (la, lb) in enumerate(RATE_PAIRS):
                est = mc_gate(gate, [la, lb], t=times, n=n, seed=sub_seed(gi, si))
                if gate == "and":
                    cf = (-np.expm1(-la * tgrid)) * (-np.expm1(-lb * tgrid))
                elif gate == "or":
                    cf = -np.expm1(-(la + lb) * tgrid)
                else:
                    cf = pand_analytic(la, lb, tgrid)
                label = f"rates=({la:g},{lb:g})"
                for t, c, e in zip(times, cf, est):
                    rows.append(BudgetRow(gate, label, t, float(c), e.probability, e.std_error, True, e.samples))
                if gate == "pand":
                    for t, e in zip(times, est):
                        num = _pand_numeric_at(la, lb, t, steps)
                        rows.append(BudgetRow("pand_numeric", label + f",steps={steps}", t, num,
                                              e.probability, e.std_error, True, e.samples))
        elif gate == "voting":
            for si, (rates, k) in enumerate(VOTING_SETS):
                est = mc_gate("voting", list(rates), t=times, n=n, seed=sub_seed(gi, si), k=k)
                curves = [FailureCurve(-np.expm1(-r * tgrid)) for r in rates]
                cf = eval_voting_curves(curves, k).probs
                label = f"rates=({','.join(f'{r:g}' for r in rates)}),K={k}"
                for t, c, e in zip(times, cf, est):
                    rows.append(BudgetRow("voting", label, t, float(c), e.probability, e.std_error, True, e.samples))
        elif gate == "wsp":
            for si, (la, lb, alpha) in enumerate(WSP_SETS):
                label = f"rates=({la:g},{lb:g}),alpha={alpha:g}"
                spare = mc_spare_marginal(la, lb, alpha, t=times, n=n, seed=sub_seed(gi, si, 0))
                joint = mc_gate("wsp", [la, lb], alpha, t=times, n=n, seed=sub_seed(gi, si, 1))
                fb = wsp_spare_cdf(la, lb, alpha, tgrid)
                fx = -np.expm1(-la * tgrid) * fb
                for t, c, e in zip(times, fb, spare):
                    rows.append(BudgetRow("wsp_spare", label, t, float(c), e.probability, e.std_error, True, e.samples))
                for t, c, e in zip(times, fx, joint):
                    rows.append(BudgetRow("wsp", label, t, float(c), e.probability, e.std_error, False, e.samples))
            rows.extend(fold_budget(n=n, seed=sub_seed(gi, 99)))
    return rows


def _pand_numeric_at(la, lb, t, steps):
    # hourly curve only covers integer t; evaluate the Riemann sum at t directly
    if float(t).is_integer():
        return eval_pand_numeric(la, lb, int(t), steps).probs[-1]
    s = np.arange(steps + 1, dtype=float) / steps * t
    fa, fb = -np.expm1(-la * s), -np.expm1(-lb * s)
    return float(np.dot(np.diff(fa), fb[-1] - fb[1:]))


FOLD_SETS = [
    (0.005, (0.008, 0.008), 0.5),
    (0.005, (0.008, 0.008, 0.008), 0.5),
    (0.015, (0.015, 0.015), 0.5),
    (0.010, (0.005, 0.020), 0.3),
]


def fold_budget(n: int = 10**6, seed: int = 0, t: float = HORIZON_HOURS) -> list[BudgetRow]:
    """Pairwise-fold WSP versus sequential-activation Monte Carlo (report-only)."""
    rows = []
    horizon = int(t)
    for i, (primary, spares, alpha) in enumerate(FOLD_SETS):
        curves = [FailureCurve.exponential(r, horizon) for r in (primary, *spares)]
        folded = eval_wsp_fold(curves, alpha).final
        est = mc_wsp_multi(primary, spares, alpha, t=t, n=n, seed=seed + i)
        label = f"primary={primary:g},spares=({','.join(f'{s:g}' for s in spares)}),alpha={alpha:g}"
        rows.append(BudgetRow("wsp_fold", label, float(t), folded, est.probability, est.std_error, False, est.samples))
    return rows


def budget_csv(rows: Iterable[BudgetRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gate", "params", "t", "closed_form", "mc_estimate", "std_error", "abs_diff",
                "normative", "within_3se"])
    for r in rows:
        w.writerow([r.gate, r.params, repr(float(r.t)), repr(float(r.closed_form)), repr(float(r.mc_estimate)),
                    repr(float(r.std_error)), repr(float(r.abs_diff)), int(r.normative), int(r.passed)])
    return buf.getvalue()
