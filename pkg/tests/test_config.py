from configparser import ConfigParser

import pytest
from bernstein_lite import _config as blt_config
from bernstein_lite import _params as blt_params
from bernstein_lite import _util as blt_util


def _edit_config(path, section, **settings):
    parser = ConfigParser()
    parser.read(path)
    for key, value in settings.items():
        parser.set(section, key, value=str(value))
    with open(path, "w") as out:
        parser.write(out)
    return path


def test_read_sample_config():
    path = blt_util.get_resource_path(blt_config.SAMPLE_CONFIG_NAME)
    cfg = blt_config.read_config(path)
    assert cfg.derived
    assert (cfg.params.p, cfg.params.q) == (4, 3)
    assert cfg.kmax == 2
    assert cfg.n1_hint == 3
    # relative outdir is relative to the config file
    assert cfg.outdir == path.parent / "blt_out"


def test_read_literal_config(tmp_config, half_params):
    cfg = blt_config.read_config(tmp_config)
    assert not cfg.derived
    assert cfg.params == half_params
    assert cfg.coeff_radius == 60
    assert cfg.trials == 20
    assert cfg.outdir == tmp_config.parent / "out"


def test_corrupted_params_rejected(tmp_config):
    _edit_config(tmp_config, "construction", c="0.6")
    with pytest.raises(blt_config.ConfigError) as err:
        blt_config.read_config(tmp_config)
    assert err.value.code == "config.ConfigError"
    assert "c < a+eps0/2" in str(err.value)


def test_overrides(tmp_config):
    cfg = blt_config.read_config(tmp_config, overrides={"kmax": 3, "seed": 7, "tol_band": None})
    assert (cfg.kmax, cfg.seed) == (3, 7)
    assert cfg.tol_band == 0.99
    assert not cfg.derived


def test_override_target_discards_literal(tmp_config):
    cfg = blt_config.read_config(tmp_config, overrides={"s": 1.0})
    assert cfg.derived
    assert cfg.params.s == 1.0


def test_override_outdir(tmp_config, tmp_dir):
    cfg = blt_config.read_config(tmp_config, overrides={"outdir": tmp_dir / "elsewhere"})
    assert cfg.outdir == tmp_dir / "elsewhere"


def test_missing_config(tmp_dir):
    with pytest.raises(blt_config.ConfigError):
        blt_config.read_config(tmp_dir / "absent.cfg")


def test_missing_section(tmp_dir):
    path = tmp_dir / "bare.cfg"
    path.write_text("[run]\nkmax = 2\n")
    with pytest.raises(blt_config.ConfigError):
        blt_config.read_config(path)


def test_missing_band(tmp_config):
    parser = ConfigParser()
    parser.read(tmp_config)
    parser.remove_option("construction", "b")
    with open(tmp_config, "w") as out:
        parser.write(out)
    with pytest.raises(blt_config.ConfigError):
        blt_config.read_config(tmp_config)


def test_write_read(tmp_config, tmp_dir):
    cfg = blt_config.read_config(tmp_config, overrides={"exp_sign": -1})
    path = cfg.write(tmp_dir / "copy.cfg")
    got = blt_config.read_config(path)
    assert got.params == cfg.params
    assert got.to_dict() == cfg.to_dict()


def test_write_derived_as_literal(tmp_dir):
    cfg = blt_config.make_config({"a": 0, "b": 3, "s": 1})
    assert cfg.derived
    got = blt_config.read_config(cfg.write(tmp_dir / "derived.cfg"))
    assert not got.derived
    assert got.params == cfg.params


def test_make_config():
    cfg = blt_config.make_config(
        {"a": "0", "b": "3", "s": "1", "mode": "strict"},
        {"kmax": "1", "window_radius": "50.0"},
    )
    assert cfg.kmax == 1
    assert cfg.window_radius == 50.0
    assert cfg.params.p == 4


@pytest.mark.parametrize(
    "run",
    [
        {"tol_band": 0},
        {"tol_band": 1.5},
        {"tol_roundtrip": -1},
        {"exp_sign": 2},
        {"kmax": 0},
        {"trials": 0},
        {"sample_step": 0},
    ],
)
def test_invalid_run_settings(run):
    with pytest.raises(blt_config.ConfigError):
        blt_config.make_config({"a": 0, "b": 3, "s": 1}, run)


@pytest.mark.parametrize(
    "construction,run",
    [
        ({"a": 0, "b": 3, "s": 1, "colour": "red"}, {}),
        ({"a": 0, "b": 3, "s": 1}, {"speed": 1}),
        ({"a": 0, "b": 3, "s": 1}, {"kmax": "two"}),
    ],
)
def test_bad_keys_and_values(construction, run):
    with pytest.raises(blt_config.ConfigError):
        blt_config.make_config(construction, run)


def test_infeasible_config():
    with pytest.raises(blt_params.Infeasible):
        blt_config.make_config({"a": 0, "b": 1.5, "s": 2})


def test_relaxed_config():
    cfg = blt_config.make_config({"a": 0, "b": 1.5, "s": 2, "mode": "relaxed"})
    assert cfg.params.mode == blt_params.RELAXED
    assert cfg.params.eps_sharp == blt_params.RELAXED_SHARPNESS
