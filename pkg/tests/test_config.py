import math

import pytest

from pseudolab.config import (
    OPTIONS,
    ExperimentConfig,
    default_epsilons,
    parse_bool,
    parse_complex,
    parse_float_list,
    parse_optional_int,
    read_config_file,
)
from pseudolab.errors import ConfigError, ValidationError


def _write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return str(path)


def test_defaults():
    config = ExperimentConfig()
    config.validate()
    assert config.potential().power == 3
    assert config.re_range == (0.0, 20.0)
    assert config.im_range == (-6.0, 10.0)
    assert config.lambda0 == 2.0 + 1.0j
    assert config.minimum_dim() == 4


def test_default_epsilons():
    levels = default_epsilons()
    assert len(levels) == 33
    assert levels[0] == pytest.approx(1e-7)
    assert levels[-1] == pytest.approx(10.0)
    assert levels[4] == pytest.approx(1e-6)


@pytest.mark.parametrize("text,expected", [
    ("2+1j", 2.0 + 1.0j),
    ("2+i", 2.0 + 1.0j),
    ("2 + 1i", 2.0 + 1.0j),
    ("3", 3.0 + 0.0j),
    ("-i", -1.0j),
])
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


def test_value_parsers():
    assert parse_bool("Yes") is True
    assert parse_bool("off") is False
    with pytest.raises(ValueError):
        parse_bool("maybe")
    assert parse_float_list("0.1, 0.2,") == [0.1, 0.2]
    assert parse_optional_int("auto") is None
    assert parse_optional_int("4") == 4


def test_every_field_has_an_option():
    fields = set(ExperimentConfig().to_dict()) - {"command"}
    assert {option.dest for option in OPTIONS} == fields
    flags = {option.flag for option in OPTIONS}
    assert "--re-min" in flags and "--h-ladder" in flags


def test_flags_override_file(tmp_path):
    path = _write(tmp_path, "[operator]\nN = 300\nbeta = 2\n\n[wkb]\nlambda0 = 3+2i\nh_ladder = 0.05, 0.04\n")
    config = ExperimentConfig.from_sources("wkb-certify", path, {"N": "500", "nx": None})
    assert config.command == "wkb-certify"
    assert config.N == 500
    assert config.beta == 2.0
    assert config.lambda0 == 3.0 + 2.0j
    assert config.h_ladder == [0.05, 0.04]
    assert config.nx == 200


def test_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(str(tmp_path / "missing.ini"))
    with pytest.raises(ConfigError):
        read_config_file(_write(tmp_path, "N = 3\n"))
    with pytest.raises(ConfigError):
        read_config_file(_write(tmp_path, "[plotting]\ncolor = red\n"))
    with pytest.raises(ConfigError):
        read_config_file(_write(tmp_path, "[window]\nN = 300\n"))
    with pytest.raises(ConfigError):
        read_config_file(_write(tmp_path, "[window]\nnx = many\n"))


@pytest.mark.parametrize("overrides,name", [
    ({"nx": "0"}, "nx"),
    ({"ny": "1"}, "ny"),
    ({"N": "3"}, "N"),
    ({"re_min": "5", "re_max": "5"}, "re_max"),
    ({"epsilons": "0.1, -1"}, "epsilons"),
    ({"delta": "2"}, "delta"),
    ({"h_ladder": "0.5, 1.5"}, "h_ladder"),
    ({"threads": "0"}, "threads"),
    ({"log_level": "loud"}, "log_level"),
])
def test_invalid_values_name_the_field(overrides, name):
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_sources("pseudospectrum", None, overrides)
    assert info.value.details["field"] == name
    assert isinstance(info.value, ValidationError)


def test_unknown_override():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_sources("pseudospectrum", None, {"colour": "red"})


def test_harmonic_oscillator_allows_small_basis():
    config = ExperimentConfig.from_sources("diagnostics", None, {"beta": "0", "N": "1", "n_ladder": "1, 2"})
    assert config.minimum_dim() == 1


def test_content_hash():
    a = ExperimentConfig()
    b = ExperimentConfig()
    assert a.content_hash() == b.content_hash()
    assert len(a.content_hash()) == 64
    b.beta = 0.5
    assert a.content_hash() != b.content_hash()
    assert a.to_dict()["lambda0"] == {"re": 2.0, "im": 1.0}
    assert not math.isnan(a.to_dict()["delta"])
