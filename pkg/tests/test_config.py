import pytest
import yaml

from aerowind.config import SCHEMA, defaults, load_config, parse_config
from aerowind.exceptions import MissingPhysicalConstant, ParseError, SchemaError

VEHICLE = {"inertia": [1.229, 0.1702, 0.8808], "T_p": 30.0}


def test_example_config_builds(config):
    assert config.params.mass == 4.0
    assert config.sensors.vanes_enabled
    assert config.scenario.kind == "steady"
    assert config.use_amae and config.ekf_options["airspeed_r_std"] == 0.3


@pytest.mark.parametrize("missing", ["inertia", "T_p"])
def test_missing_physical_constant(missing):
    vehicle = {k: v for k, v in VEHICLE.items() if k != missing}
    with pytest.raises(MissingPhysicalConstant) as info:
        parse_config({"vehicle": vehicle})
    assert info.value.key == missing


def test_unknown_key_suggests_nearest():
    with pytest.raises(SchemaError, match="did you mean 'mass'") as info:
        parse_config({"vehicle": {**VEHICLE, "mas": 4.0}})
    assert info.value.key == "vehicle.mas"
    with pytest.raises(SchemaError, match="did you mean 'ekf'"):
        parse_config({"vehicle": VEHICLE, "ekff": {}})
    with pytest.raises(SchemaError, match="did you mean 'CL0'"):
        parse_config({"vehicle": VEHICLE, "aero": {"estimator_error": {"CL_0": 0.1}}})


def test_type_and_value_errors():
    with pytest.raises(SchemaError, match="flight.airspeed"):
        parse_config({"vehicle": VEHICLE, "flight": {"airspeed": "fast"}})
    with pytest.raises(SchemaError):
        parse_config({"vehicle": VEHICLE, "wind": {"scenario": "gusty"}})
    with pytest.raises(SchemaError):
        parse_config({"vehicle": VEHICLE, "amae": {"T1": 0.5}})
    with pytest.raises(SchemaError):
        parse_config({"vehicle": {**VEHICLE, "inertia": [1.0, -1.0, 1.0]}})
    with pytest.raises(SchemaError):
        parse_config({"vehicle": VEHICLE, "replay": {"gnss": "nearest"}})
    with pytest.raises(SchemaError):
        parse_config({"vehicle": VEHICLE, "sensors": {"vanes": {"enable": True}}})


def test_bad_yaml(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("vehicle: [unclosed\n")
    with pytest.raises(ParseError):
        load_config(p)


def test_echo_round_trip(tmp_path):
    cfg = parse_config({"vehicle": VEHICLE, "aero": {"estimator_error": {"CD0": 0.01}},
                        "wind": {"scenario": "sinusoidal", "params": {"phase": 0.5}}})
    path = cfg.write_echo(tmp_path)
    again = load_config(path)
    assert again.raw == cfg.raw
    assert again.estimator_aero.CD0 == pytest.approx(0.0297)
    assert again.truth_aero.CD0 == pytest.approx(0.0197)
    assert again.scenario.steady(0.0)[0] == pytest.approx(5 + 2 * 0.479425538604203)


def test_defaults_cover_schema():
    d = defaults()
    assert set(d) == set(SCHEMA)
    assert d["vehicle"]["inertia"] is None
    assert yaml.safe_load(yaml.safe_dump(d)) == d


def test_turbulence_off_and_vanes_off():
    cfg = parse_config({"vehicle": VEHICLE, "wind": {"turbulence": {"enabled": False}},
                        "sensors": {"vanes": {"enabled": False}}})
    assert cfg.scenario.turbulence is None
    assert not cfg.sensors.vanes_enabled
