from fractions import Fraction

import numpy as np
import pytest

from swapqkd.sampling import (
    BranchPoint,
    BranchSource,
    SeededSource,
    TapeSource,
    exact_probability,
    uniform_tapes,
)


def test_seeded_source_is_deterministic():
    a = SeededSource(99)
    b = SeededSource(99)
    probs = (0.25, 0.25, 0.25, 0.25)
    assert [a.choose(probs) for _ in range(50)] == [b.choose(probs) for _ in range(50)]


def test_seeded_source_skips_zero_probability():
    rnd = SeededSource(3)
    for _ in range(200):
        assert rnd.choose((0.0, 1.0, 0.0)) == 1


def test_seeded_source_rejects_all_zero():
    with pytest.raises(ValueError):
        SeededSource(1).choose((0.0, 0.0))


def test_exact_probability_snaps_dyadics():
    assert exact_probability(0.25) == Fraction(1, 4)
    assert exact_probability(float((1 / np.sqrt(2)) ** 2)) == Fraction(1, 2)
    assert exact_probability(0.0) == 0
    with pytest.raises(ValueError):
        exact_probability(0.2500001)


def test_branch_source_replays_and_weighs():
    src = BranchSource([2, 0])
    assert src.choose((0.25, 0.25, 0.25, 0.25)) == 2
    assert src.choose((0.5, 0.5)) == 0
    assert src.weight == Fraction(1, 8)
    with pytest.raises(BranchPoint) as exc:
        src.choose((0.5, 0.0, 0.5))
    assert exc.value.indices == [0, 2]


def test_tape_source_reads_in_order():
    tape = [0.9, 0.1]
    rnd = TapeSource(tape)
    assert rnd.choose((0.5, 0.5)) == 1
    assert rnd.choose((0.5, 0.5)) == 0
    with pytest.raises(RuntimeError):
        rnd.choose((0.5, 0.5))


def test_uniform_tapes_deterministic_per_seed():
    a = uniform_tapes(7, 4, 5)
    b = uniform_tapes(7, 4, 5)
    c = uniform_tapes(8, 4, 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
