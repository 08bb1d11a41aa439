"""Weight functions on the frequency window and their axiom checks.

A weight is a positive function Lambda on the integer frequencies with
polynomial growth pinned between exponents mu0 <= mu1 <= mu and with
finite differences controlled by Lambda^{1 - |alpha|/mu}.  Two built-ins
are provided: the eigenvalue bracket <j> of the model operator and the
smoothed integer (1 + j^2)^{1/2}, both with mu0 = mu1 = mu = 1.  User
tables loaded from CSV declare their exponents and are validated, not
trusted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import ModelSpec, bracket

KIND_STANDARD = "standard"
KIND_SMOOTHED_INTEGER = "smoothed_integer"
KIND_USER_TABLE = "user_table"


@dataclass(frozen=True)
class WeightFunction:
    kind: str
    mu0: float
    mu1: float
    mu: float
    evaluator: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __post_init__(self):
        if not (0 < self.mu0 <= self.mu1 <= self.mu):
            raise ValueError("weight exponents must satisfy 0 < mu0 <= mu1 <= mu")

    def __call__(self, j: int | np.ndarray) -> np.ndarray:
        values = np.asarray(self.evaluator(np.asarray(j)), dtype=float)
        if np.any(values <= 0.0):
            raise ValueError("weight must be strictly positive")
        return values


def standard_weight(spec: ModelSpec) -> WeightFunction:
    """Lambda(j) = <j> = (1 + |lambda_j|^2)^(1/2)."""
    return WeightFunction(
        kind=KIND_STANDARD,
        mu0=1.0,
        mu1=1.0,
        mu=1.0,
        evaluator=lambda j: bracket(spec, j),
        label=f"standard(h={spec.h})",
    )


def smoothed_integer_weight() -> WeightFunction:
    """Lambda(j) = (1 + j^2)^(1/2)."""
    return WeightFunction(
        kind=KIND_SMOOTHED_INTEGER,
        mu0=1.0,
        mu1=1.0,
        mu=1.0,
        evaluator=lambda j: np.sqrt(1.0 + np.asarray(j, dtype=float) ** 2),
        label="smoothed_integer",
    )


def constant_weight(value: float = 1.0) -> WeightFunction:
    """Degenerate flat weight, useful as a regression case (mu0 treated as 1)."""
    return WeightFunction(
        kind=KIND_USER_TABLE,
        mu0=1.0,
        mu1=1.0,
        mu=1.0,
        evaluator=lambda j: np.full(np.shape(j), value, dtype=float),
        label=f"constant({value})",
    )


def user_table_weight(path, mu0: float, mu1: float, mu: float) -> WeightFunction:
    """Load Lambda from a CSV with columns (j, lambda)."""
    table: dict[int, float] = {}
    with open(path) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            table[int(row["j"])] = float(row["lambda"])

    def evaluate(j):
        j = np.atleast_1d(np.asarray(j, dtype=int))
        try:
            vals = np.array([table[int(x)] for x in j], dtype=float)
        except KeyError as exc:
            raise ValueError(f"weight table has no entry for index {exc}") from exc
        return vals

    return WeightFunction(
        kind=KIND_USER_TABLE,
        mu0=mu0,
        mu1=mu1,
        mu=mu,
        evaluator=evaluate,
        label=f"user_table({path})",
    )


# -- axiom checks --------------------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    c0_fit: float
    c1_fit: float
    verdict: bool
    mu0: float
    mu1: float


def check_growth(weight: WeightFunction, indices: np.ndarray) -> GrowthReport:
    """Tightest constants in C0 (1+|j|)^mu0 <= Lambda <= C1 (1+|j|)^mu1."""
    indices = np.asarray(indices)
    if indices.size == 0:
        raise ValueError("empty window")
    lam = weight(indices)
    c0 = float(np.min(lam / (1.0 + np.abs(indices)) ** weight.mu0))
    c1 = float(np.max(lam / (1.0 + np.abs(indices)) ** weight.mu1))
    verdict = bool(np.isfinite(c0) and np.isfinite(c1) and c0 > 0 and c1 > 0)
    return GrowthReport(c0_fit=c0, c1_fit=c1, verdict=verdict, mu0=weight.mu0, mu1=weight.mu1)


def forward_difference(values: np.ndarray, order: int) -> np.ndarray:
    """order-fold forward difference along the last axis (shrinks it)."""
    out = np.asarray(values)
    for _ in range(order):
        out = out[..., 1:] - out[..., :-1]
    return out


@dataclass(frozen=True)
class DifferenceAxiomReport:
    """Suprema of |j^gamma Delta^{alpha+gamma} Lambda| / Lambda^{1 - alpha/mu}."""

    ratios: dict = field(default_factory=dict)  # (alpha, gamma) -> sup ratio
    effective_window: tuple[int, int] = (0, 0)
    verdict: bool = True


def check_difference_axiom(
    weight: WeightFunction,
    indices: np.ndarray,
    alpha_max: int,
    gammas: tuple[int, ...] = (0, 1),
) -> DifferenceAxiomReport:
    indices = np.asarray(indices)
    max_order = alpha_max + max(gammas)
    if indices.size <= max_order:
        raise ValueError(
            f"window of size {indices.size} too small for {max_order} differences"
        )
    lam = weight(indices)
    ratios = {}
    for alpha in range(alpha_max + 1):
        for gamma in gammas:
            order = alpha + gamma
            diff = forward_difference(lam, order)
            # difference of order k is supported on the first size-k indices
            sub_idx = indices[: indices.size - order]
            denom = weight(sub_idx) ** (1.0 - alpha / weight.mu)
            numer = np.abs(sub_idx, dtype=float) ** gamma * np.abs(diff)
            ratios[(alpha, gamma)] = float(np.max(numer / denom))
    verdict = bool(all(np.isfinite(v) for v in ratios.values()))
    effective = (int(indices[0]), int(indices[-1] - max_order))
    return DifferenceAxiomReport(ratios=ratios, effective_window=effective, verdict=verdict)
