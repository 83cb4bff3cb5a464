import json

import numpy as np
import pytest

from influence_game_lab.experiments import bundled_scenario_path, resolve_scenario
from influence_game_lab.scenario import (
    ScenarioError,
    load_scenario,
    path_arrays,
    sample_path,
    stage_generator,
)

from conftest import EQ_LAPLACIAN

BASE = {
    "laplacian": EQ_LAPLACIAN.tolist(),
    "opinions": {"kind": "product", "rows": [[0.2], [0.5], [0.8]], "complete_last": True},
    "durations": {"values": [2, 4]},
    "horizon": 10,
    "alpha": [0.7, 0.5],
    "caps": 1.0,
    "seed": 3,
}


def test_load_from_dict_text_and_file(tmp_path):
    sc = load_scenario(BASE)
    assert (sc.n, sc.m, sc.horizon) == (4, 2, 10)
    np.testing.assert_allclose(sc.budgets, [7.0, 5.0])
    np.testing.assert_allclose(sc.caps, [1.0, 1.0])
    np.testing.assert_allclose(sc.opinions.support.sum(axis=1), 1.0)
    assert load_scenario(json.dumps(BASE)).budgets.tolist() == sc.budgets.tolist()
    f = tmp_path / "s.json"
    f.write_text(json.dumps(BASE))
    assert load_scenario(f).seed == 3


@pytest.mark.parametrize(
    "patch,needle",
    [
        ({"horizon": 0}, "horizon"),
        ({"caps": [1.0, -1.0]}, "caps"),
        ({"alpha": [0.7, 50.0]}, "budgets[1]"),
        ({"durations": {"values": [0, 2]}}, "durations"),
        ({"laplacian": [[1, 0], [0, 1]]}, "laplacian"),
        ({"opinions": {"kind": "product", "rows": [[0.2, 0.2]]}}, "opinions"),
    ],
)
def test_invalid_documents_name_the_field(patch, needle):
    with pytest.raises(ScenarioError) as err:
        load_scenario({**BASE, **patch})
    assert any(needle in p for p in err.value.problems)


def test_missing_fields_are_listed_together():
    with pytest.raises(ScenarioError) as err:
        load_scenario({"horizon": 3})
    assert len(err.value.problems) >= 4


def test_paths_are_reproducible_and_prefix_consistent():
    sc = load_scenario(BASE)
    a = path_arrays(sample_path(sc, 11, (2,)))
    b = path_arrays(sample_path(sc, 11, (2,)))
    np.testing.assert_array_equal(a.x, b.x)
    longer = path_arrays(sample_path(sc.with_horizon(25), 11, (2,)))
    np.testing.assert_array_equal(longer.x[:10], a.x)
    np.testing.assert_array_equal(longer.rho[:10], a.rho)
    other = path_arrays(sample_path(sc, 11, (3,)))
    assert not np.array_equal(other.x, a.x)


def test_stage_generator_streams_differ():
    a = stage_generator(1, (0,), 0).random(4)
    assert np.array_equal(a, stage_generator(1, (0,), 0).random(4))
    assert not np.array_equal(a, stage_generator(1, (0,), 1).random(4))
    assert not np.array_equal(a, stage_generator(2, (0,), 0).random(4))


def test_sampled_values_come_from_the_support():
    sc = load_scenario(BASE)
    arr = path_arrays(sample_path(sc, 5))
    assert set(np.unique(arr.durations)) <= {2.0, 4.0}
    assert set(np.round(arr.x[:, :, 0].ravel(), 12)) <= {0.2, 0.5, 0.8}
    np.testing.assert_allclose(arr.rho.sum(axis=1), 4.0)


def test_with_horizon_keeps_alpha():
    sc = load_scenario(BASE).with_horizon(40)
    np.testing.assert_allclose(sc.budgets, [28.0, 20.0])
    assert load_scenario(BASE).with_horizon(40, keep_alpha=False).budgets.tolist() == [7.0, 5.0]


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4", "fig5"])
def test_bundled_scenarios_load(name):
    assert bundled_scenario_path(name).exists()
    sc, doc = resolve_scenario(name)
    assert sc.validate() == []
    assert doc["seed"] == 7
