"""Cache-aware matrix mechanism: budget estimation and workload answering.

The estimator solves the simplified cost-estimation problem: pick one paid
scale b_P, reuse every cached strategy row whose scale is <= b_P for free,
and freshly perturb the rest at b_P, charging ||paid||_1 / b_P. The search
runs a discrete scan over cached scales followed by a continuous refinement,
and never returns a plan costlier than the cacheless one for the same draws
(the cacheless optimum with its induced free set is always a feasible plan,
so it is evaluated as a fallback).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .cache import CacheEntry, StrategyCache
from .calibration import AccuracyChecker, MCConfig, loose_bound
from .linalg import l1_norm, reconstruction_matrix
from .schema import AccuracyRequirement, RowKey

# Relative interval width at which the continuous scale search stops.
CONTINUOUS_REL_TOL = 1e-3


@dataclass
class CostPlan:
    """Free/paid split and paid scale chosen for one workload."""

    mechanism: str
    row_keys: list
    free_keys: list
    free_scales: np.ndarray
    paid_keys: list
    b_paid: float
    epsilon: float
    paid_norm: int
    recon: np.ndarray = field(repr=False)  # W' A'+, reused by the answer step
    # Rows that count against the proactive path budget: the analyst-driven
    # strategy plus whatever is actually perturbed. Strategy-expander
    # auxiliary rows stay out so they do not block prefetching.
    mark_keys: list = field(default_factory=list)

    def __post_init__(self):
        if not self.mark_keys:
            self.mark_keys = list(self.row_keys)

    @property
    def free_count(self) -> int:
        return len(self.free_keys)

    @property
    def paid_count(self) -> int:
        return len(self.paid_keys)


def estimate_privacy_budget(
    snapshot: Mapping[RowKey, CacheEntry],
    row_keys: Sequence[RowKey],
    row_masks: Sequence[np.ndarray],
    a_mapped: np.ndarray,
    w_mapped: np.ndarray,
    requirement: AccuracyRequirement,
    phi: float = 1e-4,
    config: MCConfig = MCConfig(),
    seed_material: int = 0,
    mechanism: str = "MMM",
    mark_keys: Optional[Sequence[RowKey]] = None,
) -> CostPlan:
    """Cheapest (free set, paid scale) meeting the requirement.

    Step 1 scans cached scales above the loose bound, largest first, for the
    biggest one that passes the accuracy check with its induced free set.
    Step 2 refines the paid scale in the gap up to the next cached scale,
    with the free set frozen. The returned plan is the cheaper of that search
    result and the cacheless-optimum fallback plan.
    """
    row_keys = list(row_keys)
    m = reconstruction_matrix(w_mapped, a_mapped)
    norm_all = l1_norm(row_masks)
    b_top = norm_all / phi
    b_loose = loose_bound(m, requirement)
    checker = AccuracyChecker(m, requirement, config, seed_material)
    mask_of = dict(zip(row_keys, row_masks))

    def build(b_paid: float, free_cut: float) -> CostPlan:
        free_keys, free_scales, paid_keys = [], [], []
        for key in row_keys:
            entry = snapshot.get(key)
            if entry is not None and entry.b <= free_cut:
                free_keys.append(key)
                free_scales.append(entry.b)
            else:
                paid_keys.append(key)
        paid_norm = l1_norm([mask_of[k] for k in paid_keys])
        eps = paid_norm / b_paid if paid_keys else 0.0
        marks = list(mark_keys) if mark_keys is not None else list(row_keys)
        marks += [k for k in paid_keys if k not in set(marks)]
        return CostPlan(
            mechanism, row_keys, free_keys, np.asarray(free_scales), paid_keys,
            float(b_paid), float(eps), paid_norm, m, marks,
        )

    def split_for(cut: float):
        free_idx = [
            j for j, key in enumerate(row_keys)
            if (e := snapshot.get(key)) is not None and e.b <= cut
        ]
        scales = [snapshot[row_keys[j]].b for j in free_idx]
        paid_idx = [j for j in range(len(row_keys)) if j not in set(free_idx)]
        return checker.split(free_idx, scales, paid_idx)

    # Cacheless reference: the all-paid search over the full interval. Its
    # optimum b0 with the induced free set is feasible for the cached
    # problem, so it doubles as the fallback plan.
    all_paid = checker.split([], [], range(len(row_keys)))
    b_cacheless = _largest_passing(all_paid.check, b_loose, b_top)
    if b_cacheless is None:
        # The loose bound is analytically sufficient even when the sampled
        # check disagrees at the margin; fall back to it outright.
        b_cacheless = b_loose
    if not snapshot:
        return build(b_cacheless, free_cut=0.0)
    plan_fallback = build(b_cacheless, free_cut=b_cacheless)
    if not plan_fallback.paid_keys:
        return plan_fallback

    # Step 1: discrete scan, largest candidate first (correct under
    # non-monotone checks across changing free sets; candidate lists are
    # small).
    cached_scales = sorted(
        {snapshot[k].b for k in row_keys if k in snapshot and snapshot[k].b > b_loose},
        reverse=True,
    )
    b_discrete = b_loose
    for cand in cached_scales:
        if split_for(cand).check(cand):
            b_discrete = cand
            break
    frozen = split_for(b_discrete)
    plan_discrete = build(b_discrete, free_cut=b_discrete)
    if not plan_discrete.paid_keys:
        return plan_discrete

    # Step 2: continuous refinement in the gap up to the next cached scale,
    # free set frozen so it stays exactly the scale-<=-b_P set.
    above = [b for b in cached_scales if b > b_discrete]
    ceiling = min(above) if above else b_top
    hi = ceiling if ceiling == b_top else np.nextafter(ceiling, 0.0)
    b_searched = _largest_passing(frozen.check, b_discrete, hi)
    if b_searched is None:
        b_searched = b_discrete if frozen.check(b_discrete) else b_loose
    plan_searched = build(b_searched, free_cut=b_discrete)

    best = min((plan_searched, plan_fallback), key=lambda p: (p.epsilon, -p.b_paid))
    return best


def cacheless_budget(
    row_keys, row_masks, a_mapped, w_mapped, requirement,
    phi: float = 1e-4, config: MCConfig = MCConfig(), seed_material: int = 0,
) -> CostPlan:
    """Budget of the matrix mechanism with an empty cache (the comparison target)."""
    return estimate_privacy_budget(
        {}, row_keys, row_masks, a_mapped, w_mapped, requirement,
        phi=phi, config=config, seed_material=seed_material,
    )


def _largest_passing(check, lo: float, hi: float, rel_tol: float = CONTINUOUS_REL_TOL) -> Optional[float]:
    """Largest b in [lo, hi] passing a check that is monotone on the interval."""
    if not check(lo):
        return None
    if hi <= lo:
        return lo
    if check(hi):
        return hi
    while hi - lo > rel_tol * lo:
        mid = 0.5 * (lo + hi)
        if check(mid):
            lo = mid
        else:
            hi = mid
    return lo


def answer_workload(
    cache: StrategyCache,
    plan: CostPlan,
    exact_counts: Mapping[RowKey, int],
    rng: np.random.Generator,
    proactive_keys: Sequence[RowKey] = (),
) -> tuple[np.ndarray, float]:
    """Draw fresh noise for the paid rows, update the cache, and answer.

    Proactive rows are perturbed at the same scale and written in the same
    event but never used for the response, so the charge stays the plan's
    epsilon.
    """
    noisy: dict[RowKey, float] = {}
    if plan.paid_keys or proactive_keys:
        write_keys = list(plan.paid_keys) + [k for k in proactive_keys if k not in plan.paid_keys]
        values = [
            exact_counts[key] + rng.laplace(0.0, plan.b_paid) for key in write_keys
        ]
        cache.update(write_keys, plan.b_paid, values, cache.next_timestamp())
        noisy = dict(zip(write_keys, values))

    responses = np.zeros(len(plan.row_keys))
    for j, key in enumerate(plan.row_keys):
        if key in noisy:
            responses[j] = noisy[key]
        else:
            entry = cache.get(key)
            assert entry is not None, f"free row {key} vanished from the cache"
            responses[j] = entry.value
    return plan.recon @ responses, plan.epsilon
