"""Deterministic local-hidden-variable strategies for both inequalities.

Exhaustive enumeration certifies the classical bounds (the extreme points of
the local polytope are deterministic response functions), and a seeded
sampler realizes arbitrary stochastic mixtures of strategies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

# Outcome alphabets in lexicographic order so the enumeration order of
# strategies doubles as the canonical (witness-reporting) order.
LINEAR_OUTCOMES = ("H", "V")
CIRCULAR_OUTCOMES = ("L", "R")
SPIN_OUTCOMES = (-1, 0, 1)

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, order=True)
class Strategy3Gamma:
    """Pre-assigned linear and circular outcomes for each of three photons."""

    linear: tuple[str, str, str]
    circular: tuple[str, str, str]


@dataclass(frozen=True, order=True)
class StrategySpin1:
    """Pre-assigned spin outcomes: side 1 answers (x, beta), side 2 (gamma, alpha)."""

    v_x: int
    v_beta: int
    v_gamma: int
    v_alpha: int


@lru_cache(maxsize=1)
def enumerate_3gamma_strategies() -> tuple[Strategy3Gamma, ...]:
    """All 64 deterministic assignments, in lexicographic order."""
    return tuple(
        Strategy3Gamma(lin, circ)
        for lin in itertools.product(LINEAR_OUTCOMES, repeat=3)
        for circ in itertools.product(CIRCULAR_OUTCOMES, repeat=3)
    )


@lru_cache(maxsize=1)
def enumerate_spin1_strategies() -> tuple[StrategySpin1, ...]:
    """All 81 deterministic assignments, in lexicographic order."""
    return tuple(
        StrategySpin1(*outcomes)
        for outcomes in itertools.product(SPIN_OUTCOMES, repeat=4)
    )


def ch_3gamma_strategy_value(
    strategy: Strategy3Gamma, labeling: tuple[int, int, int] = (0, 1, 2)
) -> float:
    """CH expression value for one deterministic strategy (0/1 indicators)."""
    i, j, k = labeling
    lin, circ = strategy.linear, strategy.circular
    t1 = lin[i] == "V" and lin[j] == "V"
    t2 = lin[i] == "V" and circ[j] != circ[k]
    t3 = circ[i] != circ[k] and lin[j] == "V"
    t4 = circ[0] == circ[1] == circ[2]
    return float(t1) - float(t2) - float(t3) - float(t4)


def hardy_spin1_strategy_value(strategy: StrategySpin1) -> float:
    """LHS - RHS of the spin-1 constraint for one deterministic strategy."""
    lhs = strategy.v_x == 0 and strategy.v_gamma == 0
    r1 = strategy.v_x == 0 and strategy.v_alpha != 0
    r2 = strategy.v_beta != 0 and strategy.v_gamma == 0
    r3 = strategy.v_beta == 0 and strategy.v_alpha == 0
    return float(lhs) - float(r1) - float(r2) - float(r3)


def max_ch_3gamma_lhv(
    labeling: tuple[int, int, int] = (0, 1, 2)
) -> tuple[float, Strategy3Gamma]:
    """Exhaustive maximum of the CH expression over all 64 strategies.

    By convexity this also bounds every stochastic local model.  The witness
    is the first maximizer in canonical (lexicographic) enumeration order.
    """
    best_value, best_strategy = -np.inf, None
    for strategy in enumerate_3gamma_strategies():
        value = ch_3gamma_strategy_value(strategy, labeling)
        if value > best_value:
            best_value, best_strategy = value, strategy
    return best_value, best_strategy


def max_hardy_spin1_lhv() -> tuple[float, StrategySpin1]:
    """Exhaustive maximum of the spin-1 constraint gap over all 81 strategies."""
    best_value, best_strategy = -np.inf, None
    for strategy in enumerate_spin1_strategies():
        value = hardy_spin1_strategy_value(strategy)
        if value > best_value:
            best_value, best_strategy = value, strategy
    return best_value, best_strategy


def strategy_values(kind: str) -> np.ndarray:
    """Vector of deterministic inequality values in enumeration order."""
    if kind == "3gamma":
        return np.array(
            [ch_3gamma_strategy_value(s) for s in enumerate_3gamma_strategies()]
        )
    if kind == "spin1":
        return np.array(
            [hardy_spin1_strategy_value(s) for s in enumerate_spin1_strategies()]
        )
    raise ValueError(f"unknown strategy kind {kind!r}")


def mixture_expectation(weights: Sequence[float], kind: str) -> float:
    """Exact expected inequality value of a strategy mixture."""
    weights = _validated_weights(weights, kind)
    return float(weights @ strategy_values(kind))


def _validated_weights(weights: Sequence[float], kind: str) -> np.ndarray:
    values = strategy_values(kind)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != values.shape:
        raise ValueError(
            f"mixture needs {values.size} weights for kind {kind!r}, got {weights.shape}"
        )
    if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise ValueError("mixture weights must be finite and nonnegative")
    if abs(float(weights.sum()) - 1.0) > _WEIGHT_TOL:
        raise ValueError("mixture weights must sum to 1 within 1e-12")
    return weights


class LhvSample:
    """Outcome records drawn i.i.d. from a strategy mixture.

    Each event is a full deterministic assignment, so the empirical
    inequality value is the mean of per-strategy values and converges to the
    mixture expectation (never significantly above the classical bound 0).
    """

    def __init__(self, kind: str, indices: np.ndarray):
        self.kind = kind
        self.indices = indices
        self.indices.setflags(write=False)
        self._values = strategy_values(kind)
        self._strategies = (
            enumerate_3gamma_strategies() if kind == "3gamma" else enumerate_spin1_strategies()
        )

    def __len__(self) -> int:
        return int(self.indices.size)

    def records(self) -> Iterator:
        for idx in self.indices:
            yield self._strategies[idx]

    def empirical_value(self) -> float:
        return float(self._values[self.indices].mean())

    def empirical_stderr(self) -> float:
        n = len(self)
        if n < 2:
            return float("inf")
        return float(self._values[self.indices].std(ddof=1) / np.sqrt(n))


def lhv_event_stream(
    weights: Sequence[float], n: int, seed: int, kind: str = "3gamma"
) -> LhvSample:
    """Sample ``n`` strategy records from the mixture, reproducibly.

    Randomness comes from numpy's Philox (4x64, 10 rounds) counter-based
    generator keyed with (seed, 0), matching the event generator's scheme.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    weights = _validated_weights(weights, kind)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    indices = rng.choice(weights.size, size=int(n), p=weights)
    return LhvSample(kind, indices)
