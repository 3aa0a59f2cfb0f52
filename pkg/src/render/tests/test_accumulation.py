"""Tests for flow accumulation and edge extraction"""

import pytest

from src.grid.tests.fixtures import branching_case, make_case, params_for, random_case, tree_from_paths
from src.layout.engine import assign_all
from src.render.accumulation import EdgeKind, accumulate, edge_extract


def _single():
    grid, nodes = make_case(1, 5, (0, 4), {'a': ((0, 0), 100.0)})
    return tree_from_paths(grid, [[(0, c) for c in range(5)]]), nodes


def test_single_path_carries_its_volume():
    net, nodes = _single()
    accum = accumulate(net, nodes)
    assert set(accum.values()) == {100.0}

    (edge,) = edge_extract(net, accum)
    assert edge.kind is EdgeKind.HANG
    assert edge.cells == tuple((0, c) for c in range(5))
    assert edge.volume == 100.0
    assert edge.destination_id == 'a'
    assert edge.length == pytest.approx(40.0)


def test_branching_tree_volumes():
    net, nodes = branching_case()
    accum = accumulate(net, nodes)

    assert accum[(5, 5)] == 280.0
    assert accum[(5, 3)] == 50.0
    assert accum[(3, 4)] == 330.0
    assert accum[(0, 4)] == nodes.total_volume == 370.0


def test_branching_tree_edges():
    net, nodes = branching_case()
    edges = edge_extract(net, accumulate(net, nodes))

    hang = [e for e in edges if e.kind is EdgeKind.HANG]
    other = [e for e in edges if e.kind is EdgeKind.NON_HANG]
    assert len(hang) == 5
    assert len(other) == 4
    assert sorted(e.destination_id for e in hang) == ['D', 'F', 'H', 'I', 'J']

    by_ends = {(e.start, e.end): e for e in other}
    assert by_ends[((6, 6), (4, 4))].volume == 280.0
    assert by_ends[((6, 2), (4, 4))].volume == 50.0
    assert by_ends[((4, 4), (2, 4))].volume == 330.0
    assert by_ends[((2, 4), (0, 4))].volume == 370.0


def _check_edges(net, nodes, accum, edges):
    real = [e for e in edges if e.start != e.end]

    # Every destination ends exactly one hang edge
    hang_ids = sorted(e.destination_id for e in edges if e.kind is EdgeKind.HANG)
    assert hang_ids == sorted(d.id for d in nodes.destinations)

    # Each non-origin cell is an inner or starting cell of exactly one edge
    seen = [c for e in real for c in e.cells[:-1]]
    assert len(seen) == len(set(seen))
    assert set(seen) == net.committed_cells - {net.origin}

    # Flow out of a node equals the flow entering it plus what it hosts
    for edge in real:
        if edge.kind is EdgeKind.NON_HANG:
            inflow = sum(e.volume for e in edges if e.end == edge.start)
            assert edge.volume == pytest.approx(inflow)
    assert sum(e.volume for e in real if e.end == net.origin) == pytest.approx(nodes.total_volume)


def test_branching_tree_partition_and_conservation():
    net, nodes = branching_case()
    accum = accumulate(net, nodes)
    _check_edges(net, nodes, accum, edge_extract(net, accum))


def test_pass_through_destination_gets_zero_length_hang_edge():
    grid, nodes = make_case(5, 11, (2, 10), {'A': ((2, 0), 100.0), 'B': ((2, 5), 50.0)})
    net = tree_from_paths(grid, [[(2, c) for c in range(11)], [(2, 5)]])
    accum = accumulate(net, nodes)
    edges = edge_extract(net, accum)

    assert [(e.kind, e.start, e.end, e.volume) for e in edges] == [
        (EdgeKind.HANG, (2, 0), (2, 5), 100.0),
        (EdgeKind.HANG, (2, 5), (2, 5), 50.0),
        (EdgeKind.NON_HANG, (2, 5), (2, 10), 150.0),
    ]
    _check_edges(net, nodes, accum, edges)


@pytest.mark.parametrize("seed", [3, 17, 29])
def test_accumulation_matches_path_tracing(seed):
    grid, nodes = random_case(seed, size_range=(16, 22), dest_range=(8, 8))
    net = assign_all(grid, nodes, params_for(nodes)).network
    accum = accumulate(net, nodes)

    traced = {cell: 0.0 for cell in net.committed_cells}
    for dest in nodes.destinations:
        for cell in net.route(grid.destination_cells[dest.id]):
            traced[cell] += dest.volume
    assert accum == pytest.approx(traced)
    _check_edges(net, nodes, accum, edge_extract(net, accum))
