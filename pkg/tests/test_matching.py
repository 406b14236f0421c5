import numpy as np
import pytest

from howire.matching import MatchingError, brute_force_matching, hungarian


def test_single_entry():
    a = hungarian([[3.0]])
    assert a.mapping == {0: 0}
    assert a.cost == 3.0


def test_identity_favoring():
    a = hungarian([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert a.mapping == {0: 0, 1: 1, 2: 2}
    assert a.cost == 0.0


def test_worked_example():
    # minimum over all 6 permutations is 1 + 2 + 2 = 5
    a = hungarian([[4, 1, 3], [2, 0, 5], [3, 2, 2]])
    assert a.mapping == {0: 1, 1: 0, 2: 2}
    assert a.cost == 5.0


def test_brute_force_examples():
    assert brute_force_matching([[5.0, 2.0]]).mapping == {0: 1}
    a = brute_force_matching(np.full((3, 3), 2.0))
    assert a.cost == 6.0
    assert a.mapping == {0: 0, 1: 1, 2: 2}  # lexicographically smallest tie


def test_rectangular_and_padding():
    a = hungarian([[9.0, 1.0, 5.0]])
    assert a.mapping == {0: 1}
    # more rows than columns: surplus rows are left unmatched
    a = hungarian([[1.0], [2.0], [0.5]])
    assert a.mapping == {2: 0}
    assert a.cost == 0.5


def test_non_finite_rejected():
    with pytest.raises(MatchingError):
        hungarian([[1.0, np.inf]])
    with pytest.raises(MatchingError):
        brute_force_matching([[np.nan]])


def test_brute_force_size_limit():
    with pytest.raises(MatchingError):
        brute_force_matching(np.zeros((9, 9)))


def test_oracle_sweep():
    rng = np.random.default_rng(123)
    for _ in range(400):
        rows = int(rng.integers(1, 8))
        cols = int(rng.integers(rows, 8))
        cost = rng.uniform(0, 10, size=(rows, cols))
        a = hungarian(cost)
        b = brute_force_matching(cost)
        assert a.cost == b.cost  # exact: same matched set, same sum order
        # assignment must be injective and complete
        assert len(set(a.mapping.values())) == len(a.mapping) == rows


def test_integer_ties_still_optimal():
    rng = np.random.default_rng(7)
    for _ in range(200):
        rows = int(rng.integers(1, 6))
        cols = int(rng.integers(rows, 7))
        cost = rng.integers(0, 4, size=(rows, cols)).astype(float)
        assert hungarian(cost).cost == brute_force_matching(cost).cost
