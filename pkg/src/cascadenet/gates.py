"""Failure curves and closed-form gate evaluators for dynamic fault trees.

A :class:`FailureCurve` holds hourly cumulative failure probabilities
``P(t)`` for ``t = 1..horizon``.  Gates combine curves pointwise; for
exponential inputs the results coincide with the continuous-time Bayesian
network closed forms (AND, OR, warm spare) evaluated at each sample hour.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractError

HORIZON_HOURS = 24
DEFAULT_DORMANCY = 0.5
PAND_STEPS = 10_000
# |lambda_B - lambda_A - alpha*lambda_B| below this switches WSP to its limit form
WSP_SINGULAR_EPS = 1e-9
# effective_rate saturates once P(T_h) is this close to 1
SATURATION_EPS = 1e-12
_MONOTONE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FailureCurve:
    """Hourly cumulative failure probabilities ``P(1), ..., P(horizon)``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise ContractError("a failure curve needs at least one sample")
        if not np.all(np.isfinite(p)):
            raise ContractError("failure probabilities must be finite")
        if p.min() < -_MONOTONE_TOL or p.max() > 1 + _MONOTONE_TOL:
            raise ContractError(
                f"failure probabilities must lie in [0, 1], got [{p.min()}, {p.max()}]"
            )
        if np.any(np.diff(p) < -_MONOTONE_TOL):
            raise ContractError("failure curve must be non-decreasing in t")
        p = np.maximum.accumulate(np.clip(p, 0.0, 1.0))
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def exponential(cls, rate: float, horizon: int = HORIZON_HOURS) -> "FailureCurve":
        """Curve ``1 - exp(-rate * t)`` of a single exponential component."""
        if rate < 0:
            raise ContractError(f"failure rate must be non-negative, got {rate}")
        return cls(-np.expm1(-rate * hours(horizon)))

    @classmethod
    def zeros(cls, horizon: int = HORIZON_HOURS) -> "FailureCurve":
        return cls(np.zeros(horizon))

    @classmethod
    def ones(cls, horizon: int = HORIZON_HOURS) -> "FailureCurve":
        return cls(np.ones(horizon))

    @property
    def horizon(self) -> int:
        return int(self.probs.size)

    @property
    def final(self) -> float:
        return float(self.probs[-1])

    @property
    def effective_rate(self) -> float:
        return effective_rate(self)

    def at(self, t: int) -> float:
        """Probability of failure within ``[0, t]`` for an integer hour ``t``."""
        if not 1 <= t <= self.horizon:
            raise ContractError(f"t must lie in 1..{self.horizon}, got {t}")
        return float(self.probs[t - 1])

    def scaled(self, factor: float) -> "FailureCurve":
        if not 0 <= factor <= 1:
            raise ContractError(f"scale factor must lie in [0, 1], got {factor}")
        return FailureCurve(self.probs * factor)

    def allclose(self, other: "FailureCurve", atol: float = 1e-12) -> bool:
        return self.horizon == other.horizon and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"FailureCurve(horizon={self.horizon}, P(T)={self.final:.6g})"


def hours(horizon: int = HORIZON_HOURS) -> np.ndarray:
    """Sample times ``1..horizon`` as floats."""
    if horizon < 1:
        raise ContractError(f"horizon must be >= 1, got {horizon}")
    return np.arange(1, horizon + 1, dtype=float)


def _same_horizon(curves):
    h = {c.horizon for c in curves}
    if len(h) != 1:
        raise ContractError(f"curves have mismatched horizons: {sorted(h)}")


def eval_and(curve_a: FailureCurve, curve_b: FailureCurve) -> FailureCurve:
    """Output fails once both inputs have failed: ``F_A * F_B``."""
    _same_horizon((curve_a, curve_b))
    return FailureCurve(curve_a.probs * curve_b.probs)


def eval_or(curve_a: FailureCurve, curve_b: FailureCurve) -> FailureCurve:
    """Output fails once either input has failed: ``1 - (1-F_A)(1-F_B)``."""
    _same_horizon((curve_a, curve_b))
    return FailureCurve(1.0 - (1.0 - curve_a.probs) * (1.0 - curve_b.probs))


def effective_rate(curve: FailureCurve) -> float:
    """Exponential rate that reproduces ``P(T_h)`` of ``curve``.

    Saturated curves (``P(T_h) >= 1 - 1e-12``) return the cap
    ``-ln(1e-12) / T_h``.
    """
    p = min(curve.final, 1.0 - SATURATION_EPS)
    return float(-np.log1p(-p) / curve.horizon)


def wsp_spare_cdf(rate_primary, rate_spare, dormancy, t):
    """Marginal probability that the warm spare has failed by time ``t``.

    The spare runs at ``dormancy * rate_spare`` until the primary fails and
    at ``rate_spare`` afterwards.  Near the singular locus
    ``rate_spare * (1 - dormancy) == rate_primary`` the analytic limit is used.
    """
    la, lb, alpha = float(rate_primary), float(rate_spare), float(dormancy)
    t = np.asarray(t, dtype=float)
    k = la + alpha * lb
    gap = lb - la - alpha * lb
    if abs(gap) < WSP_SINGULAR_EPS:
        e = np.exp(-lb * t)
        return (1.0 - e) - (1.0 - alpha) * lb * t * e
    ek = np.exp(-t * k)
    dormant = alpha * lb * (ek - 1.0) / (-k)
    activated = la * (-(np.exp(-lb * t) - 1.0) * k + lb * ek - lb) / (k * gap)
    return dormant - activated


def _wsp_probs(rate_primary, rate_spare, dormancy, horizon):
    if rate_primary <= 0 or rate_spare <= 0:
        return np.zeros(horizon)
    t = hours(horizon)
    f_spare = np.clip(wsp_spare_cdf(rate_primary, rate_spare, dormancy, t), 0.0, 1.0)
    return -np.expm1(-rate_primary * t) * f_spare


def _check_dormancy(dormancy):
    if not 0.0 <= dormancy <= 1.0:
        raise ContractError(f"dormancy factor must lie in [0, 1], got {dormancy}")


def eval_wsp(
    rate_primary: float,
    rate_spare: float,
    dormancy: float = DEFAULT_DORMANCY,
    horizon: int = HORIZON_HOURS,
) -> FailureCurve:
    """Two-input warm spare gate, ``F_X(t) = F_A(t) * F_B(t)``."""
    if rate_primary <= 0 or rate_spare <= 0:
        raise ContractError(
            f"WSP rates must be positive, got {rate_primary}, {rate_spare}"
        )
    _check_dormancy(dormancy)
    return FailureCurve(_wsp_probs(rate_primary, rate_spare, dormancy, horizon))


def eval_wsp_fold(
    inputs: Sequence[FailureCurve], dormancy: float = DEFAULT_DORMANCY
) -> FailureCurve:
    """Multi-input warm spare as a left fold of the binary gate.

    ``inputs[0]`` is the primary, the rest are spares in activation order.
    Every operand enters the binary closed form through its effective rate;
    zero-rate operands never fail, so the fold collapses to all-zeros.
    """
    if not inputs:
        raise ContractError("WSP needs at least one input")
    _same_horizon(inputs)
    _check_dormancy(dormancy)
    if len(inputs) == 1:
        return inputs[0]
    horizon = inputs[0].horizon
    acc = effective_rate(inputs[0])
    curve = inputs[0]
    for spare in inputs[1:]:
        curve = FailureCurve(_wsp_probs(acc, effective_rate(spare), dormancy, horizon))
        acc = effective_rate(curve)
    return curve


def pand_analytic(rate_a, rate_b, t):
    """Exact ``P(T_A < T_B <= t)`` for independent exponential inputs."""
    t = np.asarray(t, dtype=float)
    s = rate_a + rate_b
    if s == 0:
        return np.zeros_like(t)
    return rate_a * -np.expm1(-s * t) / s - np.exp(-rate_b * t) * -np.expm1(-rate_a * t)


def eval_pand_numeric(
    rate_a: float,
    rate_b: float,
    horizon: int = HORIZON_HOURS,
    steps: int = PAND_STEPS,
) -> FailureCurve:
    """Priority-AND curve by the right-endpoint Riemann sum.

    ``F(t) = sum_i [F_A(i h) - F_A((i-1) h)] [F_B(t) - F_B(i h)]`` with
    ``h = t / steps``.
    """
    if steps < 1:
        raise ContractError(f"PAND needs at least one integration step, got {steps}")
    if rate_a <= 0 or rate_b <= 0:
        raise ContractError(f"PAND rates must be positive, got {rate_a}, {rate_b}")
    out = np.empty(horizon)
    grid = np.arange(steps + 1, dtype=float) / steps
    for idx, t in enumerate(hours(horizon)):
        s = grid * t
        fa = -np.expm1(-rate_a * s)
        fb = -np.expm1(-rate_b * s)
        out[idx] = np.dot(np.diff(fa), fb[-1] - fb[1:])
    return FailureCurve(out)


def _at_least_k(probs: np.ndarray, k: int) -> np.ndarray:
    # probs: (M, ...) -> P(at least k successes), Poisson-binomial recursion
    m = probs.shape[0]
    pmf = np.zeros((m + 1,) + probs.shape[1:])
    pmf[0] = 1.0
    for j, p in enumerate(probs, start=1):
        pmf[1 : j + 1] = pmf[1 : j + 1] * (1.0 - p) + pmf[:j] * p
        pmf[0] = pmf[0] * (1.0 - p)
    return np.clip(pmf[k:].sum(axis=0), 0.0, 1.0)


def _check_votes(m, k):
    if not 1 <= k <= m:
        raise ContractError(f"VOTING needs 1 <= K <= M, got K={k}, M={m}")


def eval_voting(input_probs: Sequence[float], k: int) -> float:
    """Probability that at least ``k`` of the independent inputs failed."""
    p = np.asarray(input_probs, dtype=float)
    _check_votes(p.size, k)
    if np.any((p < 0) | (p > 1)):
        raise ContractError("VOTING input probabilities must lie in [0, 1]")
    return float(_at_least_k(p, k))


def eval_voting_curves(curves: Sequence[FailureCurve], k: int) -> FailureCurve:
    """Pointwise K-out-of-M gate over failure curves."""
    _check_votes(len(curves), k)
    _same_horizon(curves)
    return FailureCurve(_at_least_k(np.stack([c.probs for c in curves]), k))
