"""Tests for run configuration loading and resolution"""

import math

import pytest
from pydantic import ValidationError

from src.config.settings import RunConfig, get_settings, load_overrides, with_overrides
from src.grid.models import Destination, NodeSet
from src.utils.errors import ConfigError

NODES = NodeSet(origin=(0.0, 0.0), destinations=(
    Destination('a', (10.0, 0.0), 40.0),
    Destination('b', (0.0, 10.0), 250.0),
))


def test_defaults_resolve_to_map_units():
    params = RunConfig().resolve(NODES, 10.0)
    assert params.omega == 0.65
    assert params.k == 4
    assert params.k_rc3 == 0
    assert params.t_a == 120.0
    assert params.t_d == pytest.approx(10 * math.sqrt(2))
    assert params.pl_pen == pytest.approx(200.0)
    assert params.g_im == pytest.approx(100000.0)
    assert params.t_f == 250.0
    assert all([params.acute_penalty, params.short_edge_penalty, params.restrict_directions,
                params.accumulation_weights, params.exclude_committed,
                params.exclude_destinations, params.type1_first])


def test_switches_map_onto_strategies():
    params = RunConfig(st3=False, st7=False, t_f=5.0).resolve(NODES, 2.0)
    assert params.restrict_directions is False
    assert params.type1_first is False
    assert params.t_f == 5.0
    assert params.pl_pen == pytest.approx(40.0)


@pytest.mark.parametrize("field, value", [
    ('omega', 0.0),
    ('omega', 1.5),
    ('t_a', 180.0),
    ('t_d', 0.0),
    ('k', -1),
    ('resolution', -2.0),
    ('el_thresholds', (10.0, -1.0)),
])
def test_invalid_values_are_rejected(field, value):
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})
    with pytest.raises(ConfigError):
        get_settings(**{field: value})


def test_widths_must_be_ordered():
    with pytest.raises(ValidationError):
        RunConfig(w_max=0.1, w_min=0.5)


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("FLOWGRID_OMEGA", "0.35")
    monkeypatch.setenv("FLOWGRID_ST6", "false")
    cfg = get_settings()
    assert cfg.omega == 0.35
    assert cfg.st6 is False
    assert get_settings(omega=1.0).omega == 1.0


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError, match="unknown configuration keys: colour"):
        get_settings(colour='red')
    with pytest.raises(ConfigError):
        with_overrides(RunConfig(), nope=1)


def test_with_overrides_keeps_other_fields():
    cfg = with_overrides(RunConfig(omega=0.35, k=2), st1=False)
    assert (cfg.omega, cfg.k, cfg.st1) == (0.35, 2, False)


def test_thresholds_are_sorted_descending():
    assert RunConfig(el_thresholds=(20.0, 100.0, 40.0)).el_thresholds == (100.0, 40.0, 20.0)


def test_to_dict_leaves_out_execution_settings():
    data = RunConfig(threads=4, progress=True).to_dict()
    assert 'threads' not in data and 'progress' not in data
    assert data['el_thresholds'] == [100000.0, 70000.0, 40000.0, 20000.0]
    assert data['st1'] is True


def test_load_overrides_from_items_and_files(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("omega: 0.5\nst2: false\nel_thresholds: [30, 10]\n", encoding='utf-8')
    overrides = load_overrides([str(path), "omega=0.35", "K=3", "t_f="])
    assert overrides == {'omega': 0.35, 'st2': False, 'el_thresholds': (30, 10), 'k': 3, 't_f': None}
    assert get_settings(**overrides).el_thresholds == (30.0, 10.0)


def test_load_overrides_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config file"):
        load_overrides([str(tmp_path / "missing.yaml")])
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n", encoding='utf-8')
    with pytest.raises(ConfigError, match="must hold a mapping"):
        load_overrides([str(listing)])
    with pytest.raises(ConfigError, match="bad value"):
        load_overrides(["el_thresholds=a,b"])
