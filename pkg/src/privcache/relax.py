"""Relax-privacy mechanism: tighten a whole cached strategy group.

A past write event whose strategy contains the current one can be refreshed
from its old scale b_o down to the cacheless target scale b by resampling
the old noise through the gradual-release Markov kernel for Laplace noise
(Koufogiannis, Han and Pappas, "Gradual Release of Sensitive Data under
Differential Privacy", Algorithm 1). That costs only the budget difference
norm * (1/b - 1/b_o).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import mmm
from .cache import StrategyCache
from .calibration import MCConfig
from .linalg import l1_norm, reconstruction_matrix
from .schema import AccuracyRequirement, RowKey


def laplace_noise_down(
    eta_old: np.ndarray, b_old: float, b_new: float, rng: np.random.Generator
) -> np.ndarray:
    """Coordinate-wise noise-down transition from Laplace(b_old) to Laplace(b_new).

    Given eta_old marginally Laplace(b_old) and b_new <= b_old, the output is
    marginally Laplace(b_new) and positively coupled with the input: each
    coordinate keeps its old value with probability
    (b_new/b_old) * exp(-|v| (1/b_new - 1/b_old)), which averages to
    (b_new/b_old)^2 over the input law. Otherwise it draws from the exact
    conditional density, proportional to exp(-|v-x|/b_old - |x|/b_new).
    """
    if b_new > b_old:
        raise ValueError("noise-down requires b_new <= b_old")
    eta_old = np.asarray(eta_old, dtype=np.float64)
    if b_new == b_old:
        return eta_old.copy()
    v = np.abs(eta_old)
    sign = np.where(eta_old < 0, -1.0, 1.0)
    delta = 1.0 / b_new - 1.0 / b_old
    kappa = 1.0 / (1.0 / b_old + 1.0 / b_new)

    keep = rng.random(v.shape) < (b_new / b_old) * np.exp(-v * delta)

    # Piecewise-exponential conditional, weights relative to exp(-v / b_old):
    # left of 0, between 0 and v, and right of v.
    w_left = np.full_like(v, kappa)
    w_mid = -np.expm1(-v * delta) / delta
    w_right = np.exp(-v * delta) * kappa
    total = w_left + w_mid + w_right
    pick = rng.random(v.shape) * total
    u = rng.random(v.shape)

    x_left = kappa * np.log(np.clip(u, 1e-300, None))
    span = -np.expm1(-v * delta)  # 1 - exp(-delta v)
    x_mid = -np.log1p(-u * span) / delta
    x_right = v - kappa * np.log(np.clip(u, 1e-300, None))

    x = np.where(pick < w_left, x_left, np.where(pick < w_left + w_mid, x_mid, x_right))
    out = np.where(keep, v, x) * sign
    return out


def atom_mass(b_old: float, b_new: float) -> float:
    """Unconditional probability that a coordinate survives the transition."""
    return (b_new / b_old) ** 2


@dataclass
class RPPlan:
    """Chosen past group to relax, or a free read when it is already tight."""

    mechanism: str
    row_keys: list
    group_t: int
    group_keys: list
    group_b: float
    b_target: float
    epsilon: float
    recon: np.ndarray = field(repr=False)

    @property
    def free(self) -> bool:
        return self.epsilon == 0.0


def estimate_privacy_budget(
    cache: StrategyCache,
    row_keys: Sequence[RowKey],
    row_masks: Sequence[np.ndarray],
    a_mapped: np.ndarray,
    w_mapped: np.ndarray,
    requirement: AccuracyRequirement,
    mask_for: Callable[[RowKey], np.ndarray],
    phi: float = 1e-4,
    config: MCConfig = MCConfig(),
    seed_material: int = 0,
) -> Optional[RPPlan]:
    """Cheapest timestamp group containing the strategy, or None.

    The target scale is the cacheless estimate for this workload. Groups
    already at or below the target answer for free; otherwise the cost is
    the exact budget difference for relaxing the whole group.
    """
    target = mmm.cacheless_budget(
        row_keys, row_masks, a_mapped, w_mapped, requirement,
        phi=phi, config=config, seed_material=seed_material,
    )
    b_target = target.b_paid
    rows = set(row_keys)
    best: Optional[RPPlan] = None
    for t, members in cache.group_by_timestamp():
        keys = [e.key for e in members]
        if not rows <= set(keys):
            continue
        b_group = members[0].b
        norm = l1_norm([mask_for(k) for k in keys])
        epsilon = max(0.0, norm / b_target - norm / b_group)
        plan = RPPlan(
            "RP", list(row_keys), t, keys, b_group, float(b_target), float(epsilon),
            reconstruction_matrix(w_mapped, a_mapped),
        )
        if best is None or plan.epsilon < best.epsilon:
            best = plan
    return best


def answer_workload(
    cache: StrategyCache,
    plan: RPPlan,
    exact_counts: Mapping[RowKey, int],
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """Relax the chosen group in place and answer from its refreshed rows."""
    if plan.free:
        values = np.array([cache.get(k).value for k in plan.row_keys])
        return plan.recon @ values, 0.0

    entries = [cache.get(k) for k in plan.group_keys]
    assert all(e is not None and e.t == plan.group_t for e in entries), (
        "relaxation group changed since estimation"
    )
    truth = np.array([exact_counts[k] for k in plan.group_keys], dtype=np.float64)
    eta_old = np.array([e.value for e in entries]) - truth
    eta_new = laplace_noise_down(eta_old, plan.group_b, plan.b_target, rng)
    refreshed = truth + eta_new
    cache.update(plan.group_keys, plan.b_target, refreshed, cache.next_timestamp())

    by_key = dict(zip(plan.group_keys, refreshed))
    values = np.array([by_key[k] for k in plan.row_keys])
    return plan.recon @ values, plan.epsilon
