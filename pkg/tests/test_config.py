"""Configuration parsing: schema validation, defaults, overrides."""

import pytest

from ftbalance import (
    ConstraintError,
    SchemaError,
    apply_overrides,
    parse_config,
)

MINIMAL = {
    "model": "burgers",
    "datum": {"type": "riemann", "u_left": [1.0], "u_right": [0.0]},
    "eps": 0.05,
    "tau": 0.05,
}


def test_minimal_config_parses_with_defaults():
    cfg = parse_config(dict(MINIMAL))
    assert cfg.model_name == "burgers"
    assert cfg.eps == 0.05 and cfg.tau == 0.05
    assert cfg.horizon == 1.0
    assert cfg.snapshot_times == [1.0]
    assert cfg.analyzer["parity_filter"] == "any"
    assert cfg.tolerances["c1"] == 10.0


def test_model_shorthand_expands():
    cfg = parse_config(dict(MINIMAL))
    assert cfg.raw["model"] == {"name": "burgers", "params": {}}


def test_tau_exceeding_eps_rejected():
    doc = dict(MINIMAL, tau=0.1)
    with pytest.raises(ConstraintError):
        parse_config(doc)


def test_unknown_key_names_the_key():
    doc = dict(MINIMAL)
    doc["epsilonn"] = 0.05
    with pytest.raises(SchemaError) as exc:
        parse_config(doc)
    assert "epsilonn" in str(exc.value)


def test_unknown_nested_key_reports_path():
    doc = dict(MINIMAL, tolerances={"c_one": 5.0})
    with pytest.raises(SchemaError) as exc:
        parse_config(doc)
    assert "c_one" in str(exc.value)


def test_unknown_model_rejected():
    with pytest.raises(SchemaError):
        parse_config(dict(MINIMAL, model="burgerz"))


def test_missing_eps_rejected():
    doc = dict(MINIMAL)
    del doc["eps"]
    with pytest.raises(SchemaError) as exc:
        parse_config(doc)
    assert "eps" in str(exc.value)


def test_datum_type_validated():
    with pytest.raises(SchemaError):
        parse_config(dict(MINIMAL, datum={"type": "gaussian"}))


def test_datum_keys_checked_per_type():
    bad = {"type": "riemann", "u_left": [1.0], "u_right": [0.0], "xs": [0.0]}
    with pytest.raises(SchemaError) as exc:
        parse_config(dict(MINIMAL, datum=bad))
    assert "xs" in str(exc.value)


def test_snapshot_time_outside_horizon_rejected():
    with pytest.raises(ConstraintError):
        parse_config(dict(MINIMAL, snapshot_times=[2.0]))


def test_bad_parity_filter_rejected():
    doc = dict(MINIMAL, analyzer={"parity_filter": "odd"})
    with pytest.raises(SchemaError):
        parse_config(doc)


def test_invalid_json_text_rejected():
    with pytest.raises(SchemaError):
        parse_config("{not json")


def test_json_text_accepted():
    import json
    cfg = parse_config(json.dumps(MINIMAL))
    assert cfg.model_name == "burgers"


def test_overrides_dot_paths_and_json_values():
    doc = apply_overrides(dict(MINIMAL), [
        "eps=0.02",
        "tau=0.02",
        "tolerances.c1=5.0",
        "model=burgers",
        "datum.u_left=[0.5]",
    ])
    cfg = parse_config(doc)
    assert cfg.eps == 0.02 and cfg.tau == 0.02
    assert cfg.tolerances["c1"] == 5.0
    assert cfg.raw["datum"]["u_left"] == [0.5]


def test_override_without_equals_rejected():
    with pytest.raises(SchemaError):
        apply_overrides(dict(MINIMAL), ["eps"])


def test_effective_round_trips():
    cfg = parse_config(dict(MINIMAL))
    again = parse_config(cfg.effective())
    assert again.raw == cfg.raw


def test_build_datum_riemann():
    cfg = parse_config(dict(MINIMAL))
    p = cfg.build_datum()
    assert p.xs.tolist() == [0.0]
    assert p.states.tolist() == [[1.0], [0.0]]


def test_build_datum_staircase():
    doc = dict(MINIMAL, datum={"type": "staircase", "xs": [0.0, 1.0],
                               "states": [[0.1], [0.2], [0.0]]})
    p = parse_config(doc).build_datum()
    assert p.xs.tolist() == [0.0, 1.0]
    assert p.states.shape == (3, 1)
