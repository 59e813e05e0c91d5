"""Seeded random problem generation for ensemble audits and property suites."""

from __future__ import annotations

import random
from typing import Iterator

from .model import DecisionProblem, Outcome, Prospect


def random_problem(
    rng: random.Random,
    n_prospects: tuple[int, int] = (2, 6),
    n_outcomes: tuple[int, int] = (1, 5),
    value_range: tuple[float, float] = (-1000.0, 1000.0),
) -> DecisionProblem:
    """One random problem: uniform values, Dirichlet-style probabilities.

    Probabilities come from normalized exponential draws, so they are strictly
    positive and sum to 1 up to float rounding; a single-outcome prospect gets
    probability exactly 1.
    """
    lo, hi = value_range
    prospects = []
    for i in range(rng.randint(*n_prospects)):
        m = rng.randint(*n_outcomes)
        weights = [rng.expovariate(1.0) for _ in range(m)]
        total = sum(weights)
        outcomes = tuple(
            Outcome(rng.uniform(lo, hi), w / total) for w in weights
        )
        prospects.append(Prospect(f"P{i + 1}", outcomes))
    return DecisionProblem(tuple(prospects))


def random_problems(
    seed: int,
    count: int,
    n_prospects: tuple[int, int] = (2, 6),
    n_outcomes: tuple[int, int] = (1, 5),
    value_range: tuple[float, float] = (-1000.0, 1000.0),
) -> Iterator[DecisionProblem]:
    """Deterministic stream of ``count`` problems for a given seed."""
    rng = random.Random(seed)
    for _ in range(count):
        yield random_problem(rng, n_prospects, n_outcomes, value_range)
