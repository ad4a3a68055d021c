"""Run-configuration loading and validation."""
import json

import pytest

from advect2d.config import (config_from_dict, example_config_dict,
                             load_config)
from advect2d.errors import ConfigError

BASE = {
    "name": "demo",
    "domain": {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
    "beta": ["1", "0"],
    "mu": 1,
    "g": "exp(-y)",
    "p": [1, 2, "inf"],
}


def _cfg(**over):
    d = dict(BASE)
    d.update(over)
    return d


def test_minimal_config():
    run = config_from_dict(_cfg())
    assert run.name == "demo"
    assert run.domain.n_edges == 4
    assert list(run.p_list) == [1.0, 2.0, float("inf")]
    assert run.beta(0.3, 0.9) == (1.0, 0.0)


def test_domain_from_example_name():
    run = config_from_dict({"domain": {"example": "seven-segments"},
                            "beta": ["1", "0"]})
    assert run.domain.n_edges == 7


def test_unknown_top_level_key_is_named():
    with pytest.raises(ConfigError) as exc:
        config_from_dict(_cfg(betaa=["1", "0"]))
    assert "betaa" in str(exc.value)


def test_unknown_solver_field_is_named():
    with pytest.raises(ConfigError) as exc:
        config_from_dict(_cfg(solver={"quad_orderr": 5}))
    assert "quad_orderr" in str(exc.value)


def test_solver_field_type_checked():
    with pytest.raises(ConfigError):
        config_from_dict(_cfg(solver={"quad_order": -3}))
    with pytest.raises(ConfigError):
        config_from_dict(_cfg(solver={"rtol": "tight"}))
    run = config_from_dict(_cfg(solver={"quad_order": 9, "max_time": None,
                                        "density_t_list": [0.5, 1.0]}))
    assert run.solver.quad_order == 9
    assert run.solver.density_t_list == (0.5, 1.0)


def test_bad_expression_reports_position():
    with pytest.raises(ConfigError) as exc:
        config_from_dict(_cfg(mu="1 + * x"))
    assert "mu" in str(exc.value)


def test_self_intersecting_domain_is_config_error():
    bowtie = {"vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}
    with pytest.raises(ConfigError):
        config_from_dict(_cfg(domain=bowtie))


def test_arcwise_boundary_data():
    g = {"arcs": [{"edge": 3, "s0": 0.0, "s1": 1.0, "value": "2*y"}],
         "fill": 0.0}
    run = config_from_dict(_cfg(g=g))
    assert run.g.value(3, 0.5, 0.0, 0.25) == pytest.approx(0.5)
    assert run.g.value(0, 0.5, 0.5, 0.0) == 0.0


def test_output_block_and_resolved_dict(tmp_path):
    run = config_from_dict(_cfg(output={"out": "r.json", "format": "json"},
                                solver={"grid_n": 12}))
    assert run.output["format"] == "json"
    d = run.resolved_dict()
    assert d["name"] == "demo"
    assert d["p"] == [1.0, 2.0, "infinity"]
    assert d["solver"]["grid_n"] == 12
    json.dumps(d, allow_nan=False)   # no raw infinities leak through


def test_load_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(BASE))
    run = load_config(str(path))
    assert run.name == "demo"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_example_template_round_trips():
    for name in ("triangle", "square", "seven_segments"):
        tpl = example_config_dict(name)
        run = config_from_dict(tpl)
        assert run.domain.n_edges >= 3
        assert run.p_list
