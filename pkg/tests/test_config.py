from dataclasses import fields

import pytest

from lrdpp import config as config_module
from lrdpp.config import TrainConfig, load_config, make_train_config
from lrdpp.errors import ConfigError


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch, tmp_path):
    monkeypatch.setattr(config_module, "DEFAULT_CONFIG_PATH", tmp_path / "missing" / "config.yaml")
    for field in fields(TrainConfig):
        monkeypatch.delenv(f"LRDPP_{field.name.upper()}", raising=False)


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig().validate()
        assert cfg.k == 30
        assert cfg.beta == 0.95
        assert cfg.t_anneal is None

    @pytest.mark.parametrize(
        "overrides",
        [{"k": 0}, {"epsilon0": 0.0}, {"beta": 1.5}, {"delta": -1.0}, {"batch_size": 0}, {"alpha": -0.1}],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ConfigError):
            TrainConfig(**overrides).validate()

    def test_resolve_fills_horizon(self):
        cfg = TrainConfig(batch_size=100).resolve(250)
        assert cfg.t_anneal == 30.0

    def test_resolve_keeps_explicit_horizon(self):
        assert TrainConfig(t_anneal=5.0).resolve(10**6).t_anneal == 5.0


class TestLoadConfig:
    def test_missing_default_is_fine(self):
        assert load_config() == {}

    def test_missing_explicit_path(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="minimal config"):
            load_config(tmp_path / "nope.yaml")

    def test_reads_yaml(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("k: 12\nalpha: 0.5\n", encoding="utf-8")
        assert load_config(path) == {"k": 12, "alpha": 0.5}

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("learning_rate: 0.1\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="learning_rate"):
            load_config(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_environment_override(self, tmp_path, monkeypatch):
        path = tmp_path / "config.yaml"
        path.write_text("k: 12\n", encoding="utf-8")
        monkeypatch.setenv("LRDPP_K", "20")
        monkeypatch.setenv("LRDPP_BETA", "0.5")
        assert load_config(path) == {"k": 20, "beta": 0.5}

    def test_bad_environment_value(self, monkeypatch):
        monkeypatch.setenv("LRDPP_MAX_ITERS", "many")
        with pytest.raises(ConfigError):
            load_config()


class TestMakeTrainConfig:
    def test_overrides_win(self):
        cfg = make_train_config({"k": 12, "alpha": 0.5}, {"k": 8, "alpha": None})
        assert cfg.k == 8
        assert cfg.alpha == 0.5

    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            make_train_config({}, {"momentum": 0.9})

    def test_validates(self):
        with pytest.raises(ConfigError):
            make_train_config({"beta": 2.0})

    def test_integer_fields_reject_fractions(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("k: 30.5\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="whole number"):
            load_config(path)

    def test_integer_fields_accept_whole_floats(self):
        assert make_train_config({"k": 30.0, "max_iters": 1e3}).k == 30
