import itertools

import pytest

from imred.reduction import spiral_cell, spiral_index, spiral_walk


def test_first_ranks():
    assert spiral_index(2, 2) == 1
    assert spiral_index(3, 2) == 2
    assert spiral_index(3, 3) == 3
    assert spiral_index(2, 3) == 4
    assert spiral_index(2, 4) == 5
    assert spiral_index(4, 2) == 9


def test_first_cells():
    assert spiral_cell(1) == (2, 2)
    assert spiral_cell(4) == (2, 3)
    assert spiral_cell(9) == (4, 2)


def test_shells_close_at_squares():
    # rank (s - 1)^2 is the last cell whose shell is s
    for s in range(2, 30):
        cell = spiral_cell((s - 1) ** 2)
        assert max(cell) == s
        if (s - 1) ** 2 + 1 <= (s) ** 2:
            assert max(spiral_cell((s - 1) ** 2 + 1)) == s + 1


def test_walk_matches_arithmetic_to_10000():
    walk = spiral_walk()
    for rank in range(1, 10_001):
        cell = next(walk)
        assert spiral_index(*cell) == rank
        assert spiral_cell(rank) == cell


def test_order_consistency_on_pairs():
    cells = list(itertools.islice(spiral_walk(), 200))
    walk_rank = {cell: k for k, cell in enumerate(cells, 1)}
    for a in cells[:60]:
        for b in cells[:60]:
            assert (spiral_index(*a) < spiral_index(*b)) == \
                (walk_rank[a] < walk_rank[b])


def test_bijection_on_grid_window():
    for i in range(2, 40):
        for j in range(2, 40):
            assert spiral_cell(spiral_index(i, j)) == (i, j)


def test_rejects_out_of_domain():
    for i, j in ((1, 2), (2, 1), (0, 5), (2, -1)):
        with pytest.raises(ValueError):
            spiral_index(i, j)
    for rank in (0, -4):
        with pytest.raises(ValueError):
            spiral_cell(rank)
