"""Injectable random sources.

Every sampled decision in a protocol round (secret Pauli, Hadamard flag,
measurement branches, adversary coins) funnels through one ``choose``
call, which makes two things possible:

* reproducible Monte Carlo - ``SeededSource`` wraps a numpy Generator and
  each trial gets its own stream derived from (seed, trial index);
* exhaustive enumeration - ``BranchSource`` replays a fixed choice path
  and accumulates the exact rational weight of that path, raising
  ``BranchPoint`` when it reaches an unexplored decision.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


class SeededSource:
    """Categorical sampler backed by a numpy Generator."""

    __slots__ = ("_rng",)

    def __init__(self, seed) -> None:
        if isinstance(seed, np.random.Generator):
            self._rng = seed
        else:
            self._rng = np.random.default_rng(seed)

    def choose(self, probs: Sequence[float]) -> int:
        """Draw an index with the given probabilities (which sum to ~1)."""
        r = self._rng.random()
        acc = 0.0
        last = -1
        for i, p in enumerate(probs):
            if p <= 1e-15:
                continue
            acc += p
            last = i
            if r < acc:
                return i
        if last < 0:
            raise ValueError("no positive-probability branch to sample")
        return last


def uniform_tapes(seed: int, trials: int, width: int) -> np.ndarray:
    """Matrix of uniforms, one row per trial, derived once from the seed.

    Row *t* is trial *t*'s private randomness: a pure function of
    (seed, t), so trials may run in any order (or in parallel) without
    changing any sampled value.
    """
    rng = np.random.default_rng(int(seed) & _MASK64)
    return rng.random((trials, width))


class TapeSource:
    """Categorical sampler reading successive uniforms from one tape row."""

    __slots__ = ("_tape", "_i")

    def __init__(self, tape) -> None:
        self._tape = tape
        self._i = 0

    def choose(self, probs: Sequence[float]) -> int:
        try:
            r = self._tape[self._i]
        except IndexError:
            raise RuntimeError("randomness tape exhausted; widen the tape") from None
        self._i += 1
        acc = 0.0
        last = -1
        for i, p in enumerate(probs):
            if p <= 1e-15:
                continue
            acc += p
            last = i
            if r < acc:
                return i
        if last < 0:
            raise ValueError("no positive-probability branch to sample")
        return last


def exact_probability(p: float, max_denominator: int = 1 << 16, tol: float = 1e-9) -> Fraction:
    """Snap a float probability to the small-denominator rational it encodes.

    All branch probabilities in this problem are small dyadic rationals
    (amplitudes are dyadics times powers of sqrt 2), so a float further
    than ``tol`` from every rational with denominator <= ``max_denominator``
    indicates a bug and raises.
    """
    f = Fraction(float(p)).limit_denominator(max_denominator)
    if abs(float(f) - float(p)) > tol:
        raise ValueError(f"probability {p!r} is not near a small rational")
    return f


class BranchPoint(Exception):
    """An enumerator ran past its replay path; ``indices`` are the live branches."""

    def __init__(self, indices) -> None:
        super().__init__(f"unexplored choice point with branches {indices}")
        self.indices = list(indices)


class BranchSource:
    """Replays a fixed choice path, accumulating its exact weight."""

    __slots__ = ("_path", "_cursor", "weight")

    def __init__(self, path: Sequence[int]) -> None:
        self._path = tuple(path)
        self._cursor = 0
        self.weight = Fraction(1)

    def choose(self, probs: Sequence[float]) -> int:
        if self._cursor == len(self._path):
            raise BranchPoint([i for i, p in enumerate(probs) if p > 1e-9])
        i = self._path[self._cursor]
        self._cursor += 1
        self.weight *= exact_probability(probs[i])
        return i
