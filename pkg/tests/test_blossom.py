import itertools

import numpy as np
import pytest

from seamqec.blossom import MatchingError, matching_cost, max_weight_matching, min_cost_perfect_matching
from seamqec.oracle import all_pairings, brute_force_min_matching


def test_two_nodes():
    assert min_cost_perfect_matching(2, {(0, 1): 3.5}) == [(0, 1)]


def test_crossed_pairing_beats_greedy():
    # greedy takes the cheap (1, 2) edge and is then stuck with (0, 3)
    costs = {(0, 1): 2.0, (2, 3): 2.0, (1, 2): 1.0, (0, 3): 10.0, (0, 2): 9.0, (1, 3): 9.0}
    pairs = min_cost_perfect_matching(4, costs)
    assert pairs == [(0, 1), (2, 3)]
    assert matching_cost(pairs, costs) == 4.0
    assert len(list(all_pairings(range(4)))) == 3


def test_pairing_count_is_double_factorial():
    assert len(list(all_pairings(range(10)))) == 945


@pytest.mark.parametrize("seed", range(40))
def test_random_instances_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = 2 * int(rng.integers(1, 6))  # up to 10 nodes
    costs = {}
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.8:
            costs[(i, j)] = float(rng.uniform(0.1, 10.0))
    try:
        expected, _ = brute_force_min_matching(n, costs)
    except MatchingError:
        with pytest.raises(MatchingError):
            min_cost_perfect_matching(n, costs)
        return
    pairs = min_cost_perfect_matching(n, costs)
    assert sorted(x for p in pairs for x in p) == list(range(n))
    assert matching_cost(pairs, costs) == pytest.approx(expected, rel=1e-9)


def test_integer_ties_are_deterministic():
    costs = {p: 1.0 for p in itertools.combinations(range(6), 2)}
    first = min_cost_perfect_matching(6, costs)
    assert all(min_cost_perfect_matching(6, dict(costs)) == first for _ in range(5))


def test_rejections():
    with pytest.raises(MatchingError):
        min_cost_perfect_matching(3, {(0, 1): 1.0})
    with pytest.raises(MatchingError):
        min_cost_perfect_matching(4, {(0, 1): 1.0, (0, 2): 1.0})
    assert min_cost_perfect_matching(0, {}) == []


def test_max_weight_matching_basic():
    # path 0-1-2-3 with a heavy middle edge: max weight takes only the middle
    mate = max_weight_matching([(0, 1, 2), (1, 2, 5), (2, 3, 2)])
    assert mate == [-1, 2, 1, -1]
    mate = max_weight_matching([(0, 1, 2), (1, 2, 5), (2, 3, 2)], maxcardinality=True)
    assert mate == [1, 0, 3, 2]
