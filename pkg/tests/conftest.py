"""Shared strategies and helpers for the test suite."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from ceut.model import DecisionProblem, Marking, Outcome, Prospect

NAMES = ("A", "B", "C", "D", "E", "F")


@st.composite
def problems(draw, min_prospects=2, max_prospects=5, max_outcomes=4):
    """Valid decision problems with normalized probabilities."""
    k = draw(st.integers(min_prospects, max_prospects))
    prospects = []
    for i in range(k):
        m = draw(st.integers(1, max_outcomes))
        values = draw(
            st.lists(
                st.floats(-1000, 1000, allow_nan=False, allow_infinity=False),
                min_size=m,
                max_size=m,
            )
        )
        weights = draw(
            st.lists(st.floats(0.01, 1.0), min_size=m, max_size=m)
        )
        total = sum(weights)
        outcomes = tuple(
            Outcome(v, w / total) for v, w in zip(values, weights)
        )
        prospects.append(Prospect(NAMES[i], outcomes))
    return DecisionProblem(tuple(prospects))


@st.composite
def marked_problems(draw, **kwargs):
    """(problem, marking) pairs with independent random flags."""
    problem = draw(problems(**kwargs))
    flags = {
        p.name: tuple(draw(st.booleans()) for _ in p.outcomes)
        for p in problem.prospects
    }
    return problem, Marking(flags)


def random_marking(problem: DecisionProblem, rng: random.Random) -> Marking:
    return Marking(
        {
            p.name: tuple(rng.random() < 0.5 for _ in p.outcomes)
            for p in problem.prospects
        }
    )
