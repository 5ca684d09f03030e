"""Accuracy mathematics shared by the mechanisms.

Error functional convention: the expected total squared error of a noise
vector B through reconstruction matrix M = W'A'+ is computed as
||M diag(B)||_F^2. Real Laplace noise at scale b has variance 2 b^2, so the
physical expectation is twice this functional; worked values in the
literature (and our golden tests) use the functional as written, and the
factor two shows up only when comparing against empirical draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .schema import AccuracyRequirement, ExpectedSquaredError, WorstError


class FreeSetTooNoisyError(ValueError):
    """No paid scale can meet the requirement given the cached free scales."""


@dataclass(frozen=True)
class MCConfig:
    """Monte-Carlo accuracy check configuration."""

    sample_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1000:
            raise ValueError("sample_count must be at least 1000")


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from heterogeneous parts (ints, bytes, arrays)."""
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, np.ndarray):
            digest.update(np.ascontiguousarray(np.round(part, 12)).tobytes())
            digest.update(repr(part.shape).encode())
        elif isinstance(part, bytes):
            digest.update(part)
        else:
            digest.update(repr(part).encode())
        digest.update(b"|")
    return int.from_bytes(digest.digest()[:8], "big")


def sample_laplace(scales: Sequence[float], seed: int, size: Optional[int] = None) -> np.ndarray:
    """Independent Laplace draws, coordinate i at scale scales[i].

    Deterministic under a fixed seed. With size given, returns a
    (size, len(scales)) matrix of independent vectors.
    """
    scales = np.asarray(scales, dtype=np.float64)
    if (scales <= 0).any():
        raise ValueError("Laplace scales must be positive")
    rng = np.random.default_rng(seed)
    shape = scales.shape if size is None else (size, scales.shape[0])
    return rng.laplace(0.0, 1.0, shape) * scales


def expected_total_squared_error(m: np.ndarray, scales: Sequence[float]) -> float:
    """||M diag(B)||_F^2 for M = W'A'+ (see module docstring for the convention)."""
    scales = np.asarray(scales, dtype=np.float64)
    if m.shape[1] != scales.shape[0]:
        raise ValueError(f"{m.shape[1]} strategy rows but {scales.shape[0]} scales")
    return float(((m**2).sum(axis=0) * scales**2).sum())


def loose_bound(m: np.ndarray, requirement: AccuracyRequirement) -> float:
    """Analytic scale that certainly meets the requirement with equal noise.

    Worst-error form: alpha * sqrt(beta/2) / ||M||_F. Expected-squared form:
    the exact equal-scale feasibility bound sqrt(alpha^2) / ||M||_F.
    """
    frob = float(np.sqrt((m**2).sum()))
    if frob == 0.0:
        raise ValueError("reconstruction matrix is zero")
    if isinstance(requirement, WorstError):
        return requirement.alpha * np.sqrt(requirement.beta / 2.0) / frob
    return float(np.sqrt(requirement.alpha_squared) / frob)


def tight_cached_bound(
    m: np.ndarray,
    free_idx: Sequence[int],
    free_scales: Sequence[float],
    requirement: AccuracyRequirement,
) -> float:
    """Upper initializer for the paid-scale search given a fixed free set.

    Splits the error budget between the cached free rows (at their scales)
    and the paid rows (at one unknown scale); raises FreeSetTooNoisyError
    when the free rows alone exceed the budget.
    """
    free_idx = list(free_idx)
    col_sq = (m**2).sum(axis=0)
    free_term = float((col_sq[free_idx] * np.asarray(free_scales, dtype=np.float64) ** 2).sum())
    paid_idx = [j for j in range(m.shape[1]) if j not in set(free_idx)]
    paid_norm = float(np.sqrt(col_sq[paid_idx].sum()))
    if paid_norm == 0.0:
        raise ValueError("no paid rows to bound")
    if isinstance(requirement, WorstError):
        budget = requirement.alpha**2 * requirement.beta / 2.0
    else:
        budget = requirement.alpha_squared
    radicand = budget - free_term
    if radicand < 0:
        raise FreeSetTooNoisyError(
            f"free rows already exceed the error budget ({free_term:.4g} > {budget:.4g})"
        )
    return float(np.sqrt(radicand) / paid_norm)


class AccuracyChecker:
    """Requirement check for noise vectors through one reconstruction matrix.

    Worst-error checks run the Monte-Carlo simulation; the standardized
    draws are derived from (seed material, matrix, sample count) so that
    re-estimates of the same mapped workload reuse identical draws, making
    repeat certifications deterministic. Expected-squared checks are closed
    form and never sample.
    """

    def __init__(
        self,
        m: np.ndarray,
        requirement: AccuracyRequirement,
        config: MCConfig,
        seed_material: int = 0,
    ):
        self.m = np.asarray(m, dtype=np.float64)
        self.requirement = requirement
        self.config = config
        self.col_sq = (self.m**2).sum(axis=0)
        self._draws: Optional[np.ndarray] = None
        self._seed = derive_seed(seed_material, b"mc-draws", self.m, config.sample_count)
        if isinstance(requirement, WorstError):
            p = requirement.beta / 100.0
            self._p = p
            self._z = float(stats.norm.ppf(1.0 - p / 2.0))

    @property
    def draws(self) -> np.ndarray:
        if self._draws is None:
            rng = np.random.default_rng(self._seed)
            self._draws = rng.laplace(0.0, 1.0, (self.config.sample_count, self.m.shape[1]))
        return self._draws

    def _accept(self, errors: np.ndarray) -> bool:
        beta_e = float((errors > self.requirement.alpha).mean())
        n = self.config.sample_count
        delta_beta = self._z * np.sqrt(beta_e * (1.0 - beta_e) / n)
        return (beta_e + delta_beta + self._p / 2.0) < self.requirement.beta

    def check_vector(self, scales: Sequence[float]) -> bool:
        """True iff the requirement holds with per-row scales as given."""
        scales = np.asarray(scales, dtype=np.float64)
        if isinstance(self.requirement, ExpectedSquaredError):
            return float((self.col_sq * scales**2).sum()) <= self.requirement.alpha_squared
        sampled = (self.draws * scales) @ self.m.T
        errors = np.abs(sampled).max(axis=1)
        return self._accept(errors)

    def split(
        self, free_idx: Sequence[int], free_scales: Sequence[float], paid_idx: Sequence[int]
    ) -> "PaidScaleChecker":
        """Freeze the free rows and return a fast checker over the paid scale."""
        return PaidScaleChecker(self, list(free_idx), np.asarray(free_scales, float), list(paid_idx))


class PaidScaleChecker:
    """check(b) for a frozen free set; one O(N l) pass per candidate scale."""

    def __init__(self, base: AccuracyChecker, free_idx, free_scales, paid_idx):
        self.base = base
        self.free_idx = free_idx
        self.free_scales = free_scales
        self.paid_idx = paid_idx
        if isinstance(base.requirement, ExpectedSquaredError):
            self._free_term = float((base.col_sq[free_idx] * free_scales**2).sum())
            self._paid_sq = float(base.col_sq[paid_idx].sum())
        else:
            draws = base.draws
            m = base.m
            if free_idx:
                self._s_free = (draws[:, free_idx] * free_scales) @ m[:, free_idx].T
            else:
                self._s_free = np.zeros((draws.shape[0], m.shape[0]))
            if paid_idx:
                self._s_paid = draws[:, paid_idx] @ m[:, paid_idx].T
            else:
                self._s_paid = np.zeros((draws.shape[0], m.shape[0]))

    def check(self, b_paid: float) -> bool:
        req = self.base.requirement
        if isinstance(req, ExpectedSquaredError):
            return self._free_term + b_paid**2 * self._paid_sq <= req.alpha_squared
        errors = np.abs(self._s_free + b_paid * self._s_paid).max(axis=1)
        return self.base._accept(errors)


def check_accuracy(
    b_paid: float,
    snapshot: dict,
    row_keys: Sequence,
    a_mapped: np.ndarray,
    w_mapped: np.ndarray,
    requirement: AccuracyRequirement,
    config: MCConfig = MCConfig(),
    seed_material: int = 0,
) -> bool:
    """Standalone accuracy check at paid scale b_paid against a cache snapshot.

    The free set is every cached strategy row with scale <= b_paid; all other
    rows are assumed freshly perturbed at b_paid.
    """
    from .linalg import reconstruction_matrix  # local import avoids a cycle

    if b_paid <= 0:
        raise ValueError("paid scale must be positive")
    m = reconstruction_matrix(w_mapped, a_mapped)
    checker = AccuracyChecker(m, requirement, config, seed_material)
    scales = np.full(len(row_keys), float(b_paid))
    for j, key in enumerate(row_keys):
        entry = snapshot.get(key)
        if entry is not None and entry.b <= b_paid:
            scales[j] = entry.b
    return checker.check_vector(scales)
