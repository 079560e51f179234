"""Config file loading, flag precedence, and the config hash."""

import json

import pytest

from fsbench.cli import build_parser
from fsbench.config import (
    RunConfig,
    config_hash,
    load_config_file,
    parse_embedding_args,
    parse_transforms,
    resolve_config,
)
from fsbench.errors import ConfigError
from fsbench.ops import TransformMode

ALL = (TransformMode.UN, TransformMode.L2N, TransformMode.CL2N)


def resolve(argv, **kwargs):
    args = build_parser().parse_args(argv)
    return resolve_config(args, **kwargs)


def test_defaults_from_bare_eval():
    cfg = resolve(["eval", "--embeddings", "d=x.fseb"])
    assert cfg.embeddings == {"d": "x.fseb"}
    assert cfg.shots == (1, 5, 10)
    assert cfg.n_way is None
    assert cfg.seed == 0
    assert cfg.transforms == ALL
    assert cfg.out_dir == "reports"
    assert cfg.jobs == 1
    assert not cfg.stratified


def test_flag_parsing():
    cfg = resolve(
        [
            "eval",
            "--embeddings",
            "d=x.fseb",
            "--n-way",
            "2",
            "4",
            "--shots",
            "1",
            "10",
            "--queries",
            "25",
            "--episodes",
            "50",
            "--seed",
            "9",
            "--transform",
            "cl2n",
            "--stratified-queries",
            "--jobs",
            "3",
            "--out",
            "elsewhere",
        ]
    )
    assert cfg.n_way == (2, 4)
    assert cfg.shots == (1, 10)
    assert cfg.query_count == 25
    assert cfg.episodes == 50
    assert cfg.seed == 9
    assert cfg.transforms == (TransformMode.CL2N,)
    assert cfg.stratified
    assert cfg.jobs == 3
    assert cfg.out_dir == "elsewhere"


def test_parse_transforms():
    assert parse_transforms("all", (TransformMode.L2N,)) == ALL
    assert parse_transforms("un", ALL) == (TransformMode.UN,)
    assert parse_transforms(None, (TransformMode.L2N,)) == (TransformMode.L2N,)
    with pytest.raises(ConfigError):
        parse_transforms("bogus", ALL)


def test_embedding_args():
    assert parse_embedding_args(["MSLD v2.0=/a/b.fseb", "msid=c.fseb"]) == {
        "msldv2": "/a/b.fseb",
        "msid": "c.fseb",
    }
    with pytest.raises(ConfigError, match="DATASET=PATH"):
        parse_embedding_args(["nopath"])
    with pytest.raises(ConfigError, match="twice"):
        parse_embedding_args(["a=x", "A=y"])


def test_toml_config_file(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text(
        """
seed = 42
shots = [1, 5]
episodes = 20
transform = "l2n"
out = "outdir"

[embeddings]
demo = "rel/demo.fseb"
""",
        encoding="utf-8",
    )
    cfg = resolve(["eval", "--config", str(cfg_file)])
    assert cfg.seed == 42
    assert cfg.shots == (1, 5)
    assert cfg.episodes == 20
    assert cfg.transforms == (TransformMode.L2N,)
    assert cfg.out_dir == "outdir"
    # relative embedding paths resolve against the config file location
    assert cfg.embeddings["demo"] == str((tmp_path / "rel/demo.fseb").resolve())


def test_json_config_file(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(
        json.dumps({"seed": 7, "embeddings": {"d": "/abs/d.fseb"}}), encoding="utf-8"
    )
    cfg = resolve(["eval", "--config", str(cfg_file)])
    assert cfg.seed == 7
    assert cfg.embeddings == {"d": "/abs/d.fseb"}


def test_config_file_unknown_key(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text("bogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="unknown config keys"):
        load_config_file(cfg_file)


def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config_file(tmp_path / "absent.toml")


def test_config_file_bad_toml(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text("= broken", encoding="utf-8")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config_file(cfg_file)


def test_flags_beat_config_file(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('seed = 5\nshots = [5]\ntransform = "un"\n', encoding="utf-8")
    cfg = resolve(
        ["eval", "--config", str(cfg_file), "--seed", "11", "--shots", "1", "--transform", "cl2n"]
    )
    assert cfg.seed == 11
    assert cfg.shots == (1,)
    assert cfg.transforms == (TransformMode.CL2N,)


def test_env_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("FSB_SEED", "0x10")
    cfg = resolve(["eval", "--embeddings", "d=x"])
    assert cfg.seed == 16
    # flag beats env
    cfg = resolve(["eval", "--embeddings", "d=x", "--seed", "3"])
    assert cfg.seed == 3
    # file beats env
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text("seed = 5\n", encoding="utf-8")
    cfg = resolve(["eval", "--config", str(cfg_file)])
    assert cfg.seed == 5


def test_env_seed_invalid(monkeypatch):
    monkeypatch.setenv("FSB_SEED", "not-a-number")
    with pytest.raises(ConfigError, match="FSB_SEED"):
        resolve(["eval", "--embeddings", "d=x"])


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(seed=-1)
    with pytest.raises(ConfigError):
        RunConfig(episodes=1)
    with pytest.raises(ConfigError):
        RunConfig(n_way=(1,))
    with pytest.raises(ConfigError):
        RunConfig(shots=(0,))
    with pytest.raises(ConfigError):
        RunConfig(jobs=0)


def test_config_hash_ignores_out_dir_and_jobs():
    base = RunConfig(embeddings={"d": "x"}, seed=1)
    assert config_hash(base) == config_hash(
        RunConfig(embeddings={"d": "x"}, seed=1, out_dir="other", jobs=8)
    )


def test_config_hash_tracks_result_affecting_fields():
    base = RunConfig(embeddings={"d": "x"}, seed=1)
    assert config_hash(base) != config_hash(RunConfig(embeddings={"d": "x"}, seed=2))
    assert config_hash(base) != config_hash(RunConfig(embeddings={"d": "y"}, seed=1))
    assert config_hash(base) != config_hash(
        RunConfig(embeddings={"d": "x"}, seed=1, shots=(1,))
    )
    assert config_hash(base) != config_hash(
        RunConfig(embeddings={"d": "x"}, seed=1, stratified=True)
    )


def test_config_hash_stable_across_processes():
    # pure function of the content, not of interpreter state
    h = config_hash(RunConfig(embeddings={"a": "1", "b": "2"}, seed=3))
    assert h == config_hash(RunConfig(embeddings={"b": "2", "a": "1"}, seed=3))
    assert len(h) == 64 and all(c in "0123456789abcdef" for c in h)
