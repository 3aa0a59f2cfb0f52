"""Strategy ablations, parameter sweeps and base-map effects"""

import time

import pytest
from shapely.geometry import box

from src.config.settings import RunConfig
from src.grid.models import Destination, NodeSet, Region, RegionSet
from src.grid.tests.fixtures import check_tree, make_case, params_for, random_case
from src.layout.engine import assign_all
from src.metrics.report import compute
from src.pipeline.runner import execute
from src.pipeline.studies import STUDY_COLUMNS, ablation, study_table, sweep
from src.render.accumulation import accumulate, edge_extract


def _layout(grid, nodes, **overrides):
    params = params_for(nodes, grid.resolution, **overrides)
    net = assign_all(grid, nodes, params).network
    return net, compute(net, edge_extract(net, accumulate(net, nodes)), nodes, t_a=params.t_a)


def test_acute_penalty_off_allows_acute_joins():
    grid, nodes = make_case(7, 6, (3, 4), {'A': ((3, 0), 100.0), 'B': ((5, 3), 50.0)})

    net, report = _layout(grid, nodes, omega=0.35, st1=False)
    assert net.paths[1].flow_in == (3, 3)
    assert report.c_aa == 1

    net, report = _layout(grid, nodes, omega=0.35)
    assert net.paths[1].flow_in == (3, 4)
    assert report.c_aa == 0


def test_short_edge_penalty_off_shortens_hang_edges():
    grid, nodes = make_case(6, 5, (3, 4), {'A': ((3, 0), 100.0), 'B': ((4, 1), 50.0)})

    net, with_penalty = _layout(grid, nodes)
    assert net.paths[1].flow_in == (3, 3)
    assert with_penalty.el_min == pytest.approx(10 + 10 * 2 ** 0.5)

    net, without = _layout(grid, nodes, st2=False)
    assert net.paths[1].flow_in == (3, 2)
    assert without.el_min == pytest.approx(10 * 2 ** 0.5)
    assert without.el_min < with_penalty.el_min


def _crowded():
    nodes = NodeSet(
        origin=(100.0, 0.0),
        destinations=(Destination('A', (0.0, 0.0), 100.0), Destination('B', (50.0, 0.0), 50.0)),
        origin_id='O',
    )
    regions = RegionSet(regions=(Region(box(-5, -55, 105, 55)),))
    return nodes, regions


def test_destination_exclusion_off_creates_overlaps():
    nodes, regions = _crowded()
    cfg = RunConfig(resolution=10.0, extent_mode='regions')

    relaxed = execute(nodes, regions, cfg.model_copy(update={'st6': False}))
    assert relaxed.grid.destination_cells == {'A': (5, 0), 'B': (5, 5)}
    assert relaxed.metrics.c_o == 1
    assert relaxed.metrics.el_min == 0.0

    strict = execute(nodes, regions, cfg)
    assert strict.metrics.c_o == 0
    assert (5, 5) not in strict.layout.network.paths[0].cells


def _corridor_map(obstacles=(), delta=None):
    regions = [Region(box(0, 0, 90, 70), name='land')]
    if delta is not None:
        regions.append(Region(box(30, 20, 60, 50), delta=delta, name='sea'))
    nodes = NodeSet(origin=(85.0, 35.0), destinations=(Destination('A', (5.0, 35.0), 10.0),))
    return nodes, RegionSet(regions=tuple(regions), obstacles=tuple(obstacles))


def _run(nodes, regions, **overrides):
    return execute(nodes, regions, RunConfig(resolution=10.0, extent_mode='regions', **overrides))


def test_obstacle_lengthens_the_map():
    open_map = _run(*_corridor_map())
    blocked = _run(*_corridor_map(obstacles=[box(40, 20, 50, 50)]))

    assert blocked.grid.obstacle_count == 3
    assert open_map.metrics.tl == pytest.approx(80.0)
    assert blocked.metrics.tl > open_map.metrics.tl
    assert not any(blocked.grid.obstacle[c] for c in blocked.layout.network.committed_cells)


def _sea_cells(result):
    return sum(1 for row, col in result.layout.network.committed_cells if 2 <= row <= 4 and 3 <= col <= 5)


def test_costly_sea_is_avoided():
    calm = _run(*_corridor_map(delta=1.0))
    rough = _run(*_corridor_map(delta=3.0))

    assert _sea_cells(calm) == 3
    assert _sea_cells(rough) < _sea_cells(calm)


def test_default_layouts_meet_every_constraint():
    cases = [random_case(100 + seed, size_range=(20, 60), dest_range=(3, 15)) for seed in range(25)]
    assert max(max(grid.shape) for grid, _ in cases) > 40
    assert max(len(nodes.destinations) for _, nodes in cases) > 10

    elapsed = 0.0
    for grid, nodes in cases:
        params = params_for(nodes, grid.resolution)
        started = time.perf_counter()
        net = assign_all(grid, nodes, params).network
        elapsed += time.perf_counter() - started

        check_tree(net)
        report = compute(net, edge_extract(net, accumulate(net, nodes)), nodes, t_a=params.t_a)
        assert (report.c_pc, report.c_o, report.c_aa) == (0, 0, 0)
    assert elapsed < 5.0


def _battery():
    return [random_case(200 + seed, size_range=(20, 26), dest_range=(6, 10)) for seed in range(6)]


def test_map_length_grows_with_omega():
    cases = _battery()
    totals = [
        sum(_layout(grid, nodes, omega=omega)[1].tl for grid, nodes in cases)
        for omega in (1.0, 0.65, 0.35)
    ]
    assert totals[0] > totals[1] > totals[2]


@pytest.mark.parametrize("index", range(6))
def test_stricter_angle_threshold_never_lengthens_the_map(index):
    grid, nodes = _battery()[index]
    strict = _layout(grid, nodes, t_a=90.0)[1].tl
    default = _layout(grid, nodes, t_a=120.0)[1].tl
    assert strict <= default + 1e-9


def test_ablation_rows():
    nodes, regions = _crowded()
    rows = ablation(nodes, regions, RunConfig(resolution=10.0, extent_mode='regions'),
                    strategies=('st1', 'st6'))

    assert [r.label for r in rows] == ['full', 'st1 off', 'st6 off']
    assert rows[2].metrics.c_o == 1
    table = study_table(rows)
    assert all(column in table for column in STUDY_COLUMNS)
    assert rows[0].to_dict()['label'] == 'full'


def test_sweep_rows():
    nodes = random_case(7, dest_range=(4, 4))[1]
    rows = sweep(nodes, None, RunConfig(resolution=10.0), 'omega', [0.35, 1.0])
    assert [r.label for r in rows] == ['omega=0.35', 'omega=1.0']

    with pytest.raises(ValueError, match="cannot sweep"):
        sweep(nodes, None, RunConfig(), 'w_max', [1.0])
