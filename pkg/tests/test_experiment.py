import pytest
import yaml

from avtse.errors import ConfigurationError
from avtse.experiment import (
    DEFAULT_CONDITIONS,
    env_overrides,
    freeze_config,
    resolve_config,
)


def test_defaults():
    cfg = resolve_config()
    assert cfg.model.n_channels == 256
    assert cfg.train.lr == 5e-4
    assert cfg.corpus.sample_rate == 16000
    assert cfg.eval_conditions == DEFAULT_CONDITIONS


def test_toy_preset():
    cfg = resolve_config(preset="toy-8k")
    assert cfg.model.n_channels == 32
    assert cfg.model.hidden_dim == 16
    assert cfg.model.chunk_size == 25
    assert cfg.model.sample_rate == 8000
    assert cfg.corpus.n_speakers == 8
    assert cfg.corpus.clip_seconds == 0.5
    assert cfg.corpus.n_train == 256


def test_unknown_preset_rejected():
    with pytest.raises(ConfigurationError):
        resolve_config(preset="nope")


def test_config_file_overrides_preset(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({"model": {"hidden_dim": 24}, "seed": 9}))
    cfg = resolve_config(preset="toy-8k", config_path=path)
    assert cfg.model.hidden_dim == 24
    assert cfg.model.n_channels == 32  # preset survives where not overridden
    assert cfg.seed == 9
    assert cfg.corpus.seed == 9  # master seed propagates
    assert cfg.train.seed == 9


def test_env_overrides_file(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump({"model": {"norm_kind": "gLN"}}))
    env = {"AVTSE_MODEL__NORM_KIND": "LN", "AVTSE_SEED": "4", "UNRELATED": "x"}
    cfg = resolve_config(config_path=path, environ=env)
    assert cfg.model.norm_kind == "LN"
    assert cfg.seed == 4


def test_flag_overrides_win(tmp_path):
    env = {"AVTSE_TRAIN__LR": "0.01"}
    cfg = resolve_config(environ=env, overrides={"train": {"lr": 0.5}})
    assert cfg.train.lr == 0.5


def test_explicit_subseed_respected():
    cfg = resolve_config(overrides={"seed": 3, "corpus": {"seed": 8}})
    assert cfg.corpus.seed == 8
    assert cfg.train.seed == 3


def test_causal_gln_rejected_at_parse():
    with pytest.raises(ConfigurationError):
        resolve_config(overrides={"model": {"causal": True, "norm_kind": "gLN"}})


def test_noncausal_cln_warns_only():
    with pytest.warns(UserWarning):
        cfg = resolve_config(overrides={"model": {"causal": False, "norm_kind": "cLN"}})
    assert cfg.model.norm_kind == "cLN"


def test_unknown_keys_rejected():
    with pytest.raises(ConfigurationError):
        resolve_config(overrides={"modle": {}})
    with pytest.raises(ConfigurationError):
        resolve_config(overrides={"model": {"n_chanels": 3}})


def test_env_parsing_types():
    env = {"AVTSE_MODEL__CAUSAL": "true", "AVTSE_TRAIN__BATCH_SIZE": "12",
           "AVTSE_MODEL__NORM_KIND": "cLN"}
    out = env_overrides(env)
    assert out["model"]["causal"] is True
    assert out["train"]["batch_size"] == 12


def test_freeze_roundtrip(tmp_path):
    cfg = resolve_config(preset="toy-8k", overrides={"seed": 17})
    path = freeze_config(cfg, tmp_path)
    assert path.name == "resolved_config.yaml"
    reloaded = resolve_config(config_path=path)
    assert reloaded.to_dict() == cfg.to_dict()
