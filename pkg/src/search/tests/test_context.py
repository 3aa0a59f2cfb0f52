"""Tests for the per-step quantities of the search"""

import math

import numpy as np
import pytest

from src.grid.tests.fixtures import make_case, params_for
from src.search.context import (
    SearchContext,
    direction_code,
    direction_sector,
    direction_weight,
    penalized_length,
    potential_accumulation,
    search_directions,
    step_cost,
)
from src.utils.errors import NotAdjacentError, SearchError


def test_step_cost_flat():
    gs, _ = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)})
    assert step_cost(gs, (1, 1), (1, 2)) == pytest.approx(10.0)
    assert step_cost(gs, (1, 1), (2, 2)) == pytest.approx(14.142135623730951)


def test_step_cost_weighted():
    gs, _ = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)}, weights={(1, 2): 3.0, (2, 1): 3.0, (1, 1): 3.0})
    assert step_cost(gs, (0, 2), (1, 2)) == pytest.approx(20.0)
    assert step_cost(gs, (1, 1), (2, 1)) == pytest.approx(30.0)
    assert step_cost(gs, (1, 1), (2, 2)) == pytest.approx(20.0 * math.sqrt(2))
    gs3, _ = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)}, weights={(1, 1): 3.0, (2, 0): 3.0})
    assert step_cost(gs3, (1, 1), (2, 0)) == pytest.approx(42.426, abs=1e-3)


def test_step_cost_requires_neighbors():
    gs, _ = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)})
    with pytest.raises(NotAdjacentError):
        step_cost(gs, (0, 0), (0, 2))
    with pytest.raises(NotAdjacentError):
        direction_code((1, 1), (1, 1))


@pytest.mark.parametrize("angle, expected", [
    (0.0, {7, 0, 1}),
    (100.0, {1, 2, 3}),
    (359.0, {6, 7, 0}),
    (360.0, {7, 0, 1}),
    (45.0, {0, 1, 2}),
])
def test_direction_sector(angle, expected):
    assert direction_sector(angle) == expected


def test_search_directions_point_toward_target():
    assert search_directions((0, 0), (0, 5)) == {7, 0, 1}      # east
    assert search_directions((0, 0), (5, 0)) == {5, 6, 7}      # north
    assert search_directions((5, 5), (2, 5)) == {1, 2, 3}      # south
    assert search_directions((5, 1), (3, 3)) == {0, 1, 2}      # south-east
    with pytest.raises(SearchError):
        search_directions((1, 1), (1, 1))


def test_potential_accumulation_window():
    gs, nodes = make_case(5, 5, (0, 4), {'a': ((2, 2), 100.0)})
    pf = potential_accumulation(gs, nodes, 0)
    assert pf[2, 2] == 100.0
    assert pf.sum() == 100.0

    gs, nodes = make_case(5, 5, (0, 4), {'a': ((2, 3), 100.0)})
    assert potential_accumulation(gs, nodes, 1)[2, 2] == 100.0

    gs, nodes = make_case(5, 5, (0, 4), {'a': ((1, 1), 100.0), 'b': ((3, 3), 280.0)})
    pf = potential_accumulation(gs, nodes, 1)
    assert pf[2, 2] == 380.0
    assert pf[0, 0] == 100.0
    assert pf[4, 4] == 280.0
    assert pf.shape == gs.shape
    assert (pf >= 0).all()


def test_potential_accumulation_rejects_negative_window():
    gs, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)})
    with pytest.raises(ValueError):
        potential_accumulation(gs, nodes, -1)


def test_direction_weight_branches():
    assert direction_weight(300, 100, 10, 50) == pytest.approx(25.0)
    assert direction_weight(100, 300, 10, 50) == pytest.approx(5.0)
    assert direction_weight(200, 200, 10, 50) == pytest.approx(5.0)


def test_penalized_length():
    _, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)})
    params = params_for(nodes)
    assert params.pl_pen == pytest.approx(200.0)
    assert params.g_im == pytest.approx(100000.0)
    assert params.t_d == pytest.approx(10 * math.sqrt(2))
    assert penalized_length(30.0, 20.0, 0, params) == pytest.approx(43.0)
    assert penalized_length(30.0, 20.0, 1, params) == pytest.approx(243.0)


def _context(gs, nodes, committed, downstream_dir=None, **overrides):
    params = params_for(nodes, **overrides)
    pf = potential_accumulation(gs, nodes, params.k)
    return SearchContext.create(gs, params, pf, committed, downstream_dir)


def test_context_requires_committed_origin():
    gs, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)})
    params = params_for(nodes)
    pf = potential_accumulation(gs, nodes, params.k)
    with pytest.raises(SearchError):
        SearchContext.create(gs, params, pf, {})
    with pytest.raises(SearchError):
        SearchContext.create(gs, params, -np.ones(gs.shape), {(0, 0): 0.0})


def test_exclusion_zones_block_other_destinations_only():
    gs, nodes = make_case(7, 7, (0, 0), {'a': ((3, 3), 1.0), 'b': ((6, 6), 1.0)})
    ctx = _context(gs, nodes, {(0, 0): 0.0}, k_rc3=1)

    assert ctx.is_blocked((3, 4), start=(6, 6), destination_id='b')
    assert ctx.is_blocked((2, 2), start=(6, 6), destination_id='b')
    assert not ctx.is_blocked((3, 4), start=(3, 3), destination_id='a')
    assert ctx.is_blocked((5, 5), start=(3, 3), destination_id='a')
    assert not ctx.is_blocked((0, 0), start=(3, 3), destination_id='a')

    relaxed = _context(gs, nodes, {(0, 0): 0.0}, k_rc3=1, st6=False)
    assert not relaxed.is_blocked((3, 4), start=(6, 6), destination_id='b')


def test_obstacles_are_blocked():
    gs, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)}, obstacles=[(1, 1)])
    ctx = _context(gs, nodes, {(0, 0): 0.0})
    assert ctx.is_blocked((1, 1), start=(2, 2), destination_id='a')
    assert (1, 1) not in {nbr for nbr, _ in ctx.moves((2, 2), (2, 2), 'a', restrict=False)}


def test_diagonal_move_may_not_cut_a_tree_edge():
    gs, nodes = make_case(3, 3, (0, 2), {'b': ((0, 0), 1.0), 'a': ((2, 2), 1.0)})
    committed = {(0, 2): 0.0, (0, 1): 10.0, (1, 0): 24.14}
    downstream = {(0, 1): 0, (1, 0): 1}    # (1,0) -SE-> (0,1) -E-> (0,2)

    ctx = _context(gs, nodes, committed, downstream)
    reachable = {nbr for nbr, _ in ctx.moves((0, 0), (0, 0), 'b', restrict=False)}
    assert reachable == {(0, 1), (1, 0)}

    open_tree = _context(gs, nodes, committed, downstream, st5=False)
    reachable = {nbr for nbr, _ in open_tree.moves((0, 0), (0, 0), 'b', restrict=False)}
    assert reachable == {(0, 1), (1, 0), (1, 1)}


def test_restricted_moves_follow_the_origin_sector():
    gs, nodes = make_case(5, 5, (2, 4), {'a': ((2, 0), 1.0)})
    ctx = _context(gs, nodes, {(2, 4): 0.0})
    codes = [code for _, code in ctx.moves((2, 0), (2, 0), 'a', restrict=True)]
    assert codes == [0, 1, 7]


def test_step_units_and_length():
    gs, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 1.0)}, weights={(1, 1): 3.0})
    ctx = _context(gs, nodes, {(0, 0): 0.0})
    assert ctx.step_units((0, 0), (1, 1), 7) == (0.0, 4.0)
    assert ctx.step_units((1, 0), (1, 1), 0) == (4.0, 0.0)
    assert ctx.length(4.0, 0.0) == pytest.approx(20.0)
    assert ctx.length(0.0, 2.0) == pytest.approx(10 * math.sqrt(2))


def test_move_weight_off_without_accumulation_weights():
    gs, nodes = make_case(3, 3, (0, 0), {'a': ((2, 2), 100.0)})
    assert _context(gs, nodes, {(0, 0): 0.0}, st4=False).move_weight((2, 2), (2, 1), 4) == 0.0
    weighted = _context(gs, nodes, {(0, 0): 0.0}, k=0)
    # Leaving the destination cell drops Pf by 100: (100 + T_f) / 10 with T_f = 100
    assert weighted.move_weight((2, 2), (2, 1), 4) == pytest.approx(20.0)
    assert weighted.move_weight((2, 1), (2, 0), 4) == pytest.approx(10.0)
