"""Run configuration: file loading, flag merging, provenance hashing.

Configuration may come from a TOML or JSON file, from command-line
flags, or both; flags win field by field. The config hash covers every
result-affecting field (and only those), so reports written to different
output directories by otherwise identical runs stay byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import ConfigError
from .mapping import normalize_dataset_name
from .ops import TransformMode

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

ENV_SEED = "FSB_SEED"
ALL_MODES = (TransformMode.UN, TransformMode.L2N, TransformMode.CL2N)
_CONFIG_KEYS = {
    "embeddings",
    "protocol",
    "n_way",
    "shots",
    "queries",
    "episodes",
    "seed",
    "transform",
    "stratified",
    "jobs",
    "out",
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one CLI invocation."""

    embeddings: Mapping[str, str] = field(default_factory=dict)
    protocols: tuple = ()
    n_way: Optional[tuple] = None  # None = one cell per dataset at its class count
    shots: tuple = (1, 5, 10)
    query_count: Optional[int] = None
    episodes: Optional[int] = None
    seed: int = 0
    transforms: tuple = ALL_MODES
    stratified: bool = False
    swap_direction: bool = False
    jobs: int = 1
    out_dir: str = "reports"

    def __post_init__(self) -> None:
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.episodes is not None and self.episodes < 2:
            raise ConfigError("episodes must be at least 2")
        if self.query_count is not None and self.query_count < 1:
            raise ConfigError("queries must be at least 1")
        if self.n_way is not None and any(n < 2 for n in self.n_way):
            raise ConfigError("n_way values must be at least 2")
        if any(m < 1 for m in self.shots):
            raise ConfigError("shot values must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")


def load_config_file(path) -> dict:
    """Parse a TOML (default) or JSON (.json) config file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        if p.suffix.lower() == ".json":
            raw = json.loads(p.read_text(encoding="utf-8"))
        else:
            with open(p, "rb") as fh:
                raw = tomllib.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {p} must hold a table/object at top level")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}; known: {sorted(_CONFIG_KEYS)}")
    embeddings = raw.get("embeddings", {})
    if embeddings and not (
        isinstance(embeddings, dict)
        and all(isinstance(k, str) and isinstance(v, str) for k, v in embeddings.items())
    ):
        raise ConfigError("config 'embeddings' must map dataset names to file paths")
    # Paths are relative to the config file, not the working directory.
    raw["embeddings"] = {
        k: str((p.parent / v).resolve()) if not Path(v).is_absolute() else v
        for k, v in embeddings.items()
    }
    return raw


def parse_embedding_args(pairs: Optional[Sequence[str]]) -> dict:
    """Parse repeatable DATASET=PATH flags into a canonical-key dict."""
    out: dict = {}
    for pair in pairs or ():
        name, sep, path = pair.partition("=")
        if not sep or not name.strip() or not path.strip():
            raise ConfigError(f"--embeddings expects DATASET=PATH, got {pair!r}")
        key = normalize_dataset_name(name)
        if key in out:
            raise ConfigError(f"dataset {key!r} given twice via --embeddings")
        out[key] = path.strip()
    return out


def parse_transforms(value: Optional[str], default: tuple) -> tuple:
    if value is None:
        return default
    if value == "all":
        return ALL_MODES
    try:
        return (TransformMode(value),)
    except ValueError:
        raise ConfigError(
            f"unknown transform {value!r}; choose un, l2n, cl2n, or all"
        ) from None


def _int_tuple(value, what: str) -> tuple:
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"config {what!r} must be a list of integers") from None


def resolve_config(args, *, default_transforms: tuple = ALL_MODES) -> RunConfig:
    """Merge config file, environment, and flags into a RunConfig."""
    file_cfg = load_config_file(args.config) if getattr(args, "config", None) else {}

    embeddings = {
        normalize_dataset_name(k): v for k, v in file_cfg.get("embeddings", {}).items()
    }
    embeddings.update(parse_embedding_args(getattr(args, "embeddings", None)))

    seed = getattr(args, "seed", None)
    if seed is None and "seed" in file_cfg:
        seed = int(file_cfg["seed"])
    if seed is None and os.environ.get(ENV_SEED):
        try:
            seed = int(os.environ[ENV_SEED], 0)
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer, got {os.environ[ENV_SEED]!r}") from None
    if seed is None:
        seed = 0

    n_way = getattr(args, "n_way", None)
    if n_way is None and "n_way" in file_cfg:
        n_way = _int_tuple(file_cfg["n_way"], "n_way")
    shots = getattr(args, "shots", None)
    if shots is None and "shots" in file_cfg:
        shots = _int_tuple(file_cfg["shots"], "shots")
    if shots is None:
        shots = (1, 5, 10)

    episodes = getattr(args, "episodes", None)
    if episodes is None and "episodes" in file_cfg:
        episodes = int(file_cfg["episodes"])
    query_count = getattr(args, "queries", None)
    if query_count is None and "queries" in file_cfg:
        query_count = int(file_cfg["queries"])

    transform_flag = getattr(args, "transform", None)
    if transform_flag is None and "transform" in file_cfg:
        raw = file_cfg["transform"]
        if isinstance(raw, str):
            transforms = parse_transforms(raw, default_transforms)
        else:
            transforms = tuple(parse_transforms(v, default_transforms)[0] for v in raw)
    else:
        transforms = parse_transforms(transform_flag, default_transforms)

    protocols = tuple(getattr(args, "protocol", None) or ())
    if not protocols and "protocol" in file_cfg:
        raw = file_cfg["protocol"]
        protocols = (raw,) if isinstance(raw, str) else tuple(raw)

    stratified = bool(getattr(args, "stratified_queries", False)) or bool(
        file_cfg.get("stratified", False)
    )
    jobs = getattr(args, "jobs", None)
    if jobs is None:
        jobs = int(file_cfg.get("jobs", 1))
    out_dir = getattr(args, "out", None) or file_cfg.get("out") or "reports"

    return RunConfig(
        embeddings=embeddings,
        protocols=protocols,
        n_way=tuple(n_way) if n_way is not None else None,
        shots=tuple(shots),
        query_count=query_count,
        episodes=episodes,
        seed=seed,
        transforms=transforms,
        stratified=stratified,
        swap_direction=bool(getattr(args, "swap_direction", False)),
        jobs=jobs,
        out_dir=str(out_dir),
    )


def config_hash(cfg: RunConfig) -> str:
    """Hex digest over the result-affecting configuration fields.

    Output directory and job count are excluded on purpose: neither can
    change report content, and reruns into a different directory must
    hash (and therefore serialize) identically.
    """
    doc = {
        "embeddings": {k: cfg.embeddings[k] for k in sorted(cfg.embeddings)},
        "protocols": list(cfg.protocols),
        "n_way": list(cfg.n_way) if cfg.n_way is not None else None,
        "shots": list(cfg.shots),
        "query_count": cfg.query_count,
        "episodes": cfg.episodes,
        "seed": cfg.seed,
        "transforms": [m.value for m in cfg.transforms],
        "stratified": cfg.stratified,
        "swap_direction": cfg.swap_direction,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()
