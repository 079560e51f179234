"""Command-line entry point.

The CLI is a thin shell over the library: every behavior reachable here
is reachable through library calls with identical results. Reports are
written atomically and embed the config hash, base seed, and package
version. Exit codes: 0 success, 2 configuration error, 3 data or format
error, 4 infeasible protocol.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    RunConfig,
    config_hash,
    parse_transforms,
    resolve_config,
)
from .errors import ConfigError, FsbenchError
from .evaluation import (
    CSV_COLUMNS,
    RunSummary,
    run_cell,
    summary_csv_row,
    summary_to_json,
)
from .ioutil import write_text_atomic
from .ops import TransformMode
from .protocols import select_protocols, validate_mapping
from .store import read_dataset, remap_labels
from .version import __version__


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsbench",
        description="Few-shot evaluation over precomputed image embeddings.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--config", metavar="PATH", help="TOML or JSON config file")
    grid.add_argument(
        "--embeddings",
        action="append",
        metavar="DATASET=PATH",
        help="embedding file for a dataset (repeatable)",
    )
    grid.add_argument("--n-way", dest="n_way", nargs="+", type=int, metavar="N")
    grid.add_argument("--shots", nargs="+", type=int, metavar="M")
    grid.add_argument("--queries", type=int, metavar="Q")
    grid.add_argument("--episodes", type=int, metavar="E")
    grid.add_argument("--seed", type=int, metavar="SEED")
    grid.add_argument("--transform", choices=["un", "l2n", "cl2n", "all"])
    grid.add_argument("--stratified-queries", action="store_true")
    grid.add_argument("--jobs", type=int, metavar="J")
    grid.add_argument("--out", metavar="DIR", help="report directory (default: reports)")

    p_eval = sub.add_parser("eval", parents=[grid], help="run in-domain episodic grids")
    p_eval.set_defaults(func=cmd_eval)

    p_cross = sub.add_parser("cross", parents=[grid], help="run named evaluation protocols")
    p_cross.add_argument(
        "--protocol",
        action="append",
        metavar="NAME",
        help="protocol name or family (repeatable; default: all builtins)",
    )
    p_cross.add_argument(
        "--swap-direction",
        action="store_true",
        help="exchange support and query roles of directional protocols",
    )
    p_cross.set_defaults(func=cmd_cross)

    p_inspect = sub.add_parser("inspect", help="dump an embedding file's manifest")
    p_inspect.add_argument("path", metavar="FILE.fseb")
    p_inspect.set_defaults(func=cmd_inspect)

    p_plot = sub.add_parser("plotdata", help="derive plot-ready CSV series from reports")
    p_plot.add_argument("report_dir", metavar="DIR")
    p_plot.add_argument("--out", metavar="DIR", help="output directory (default: report dir)")
    p_plot.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FsbenchError as exc:
        _log(f"error: {exc}")
        return exc.exit_code
    except OSError as exc:
        _log(f"i/o error: {exc}")
        return 3


def _load_embeddings(cfg: RunConfig, required=None) -> dict:
    if not cfg.embeddings:
        raise ConfigError("no embeddings given; pass --embeddings DATASET=PATH or a config file")
    for key in required or ():
        if key not in cfg.embeddings:
            raise ConfigError(
                f"dataset {key!r} is required by the selected protocols; "
                f"pass --embeddings {key}=PATH"
            )
    datasets = {}
    for key in sorted(cfg.embeddings):
        path = Path(cfg.embeddings[key])
        if not path.is_file():
            raise ConfigError(f"embedding file for dataset {key!r} not found: {path}")
        datasets[key] = read_dataset(path)
    return datasets


def _execute(cells, jobs: int):
    """Run (name, thunk) cells, optionally in parallel; order-stable results.

    Returns [(name, summary_or_exception)] in the input order, so output
    bytes cannot depend on the job count.
    """

    def run(cell):
        name, thunk = cell
        try:
            return name, thunk()
        except FsbenchError as exc:
            return name, exc

    if jobs <= 1 or len(cells) <= 1:
        return [run(c) for c in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, cells))


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _emit_results(results, out: Path, chash: str, protocol_by_name=None):
    """Write per-cell JSON (or .failed markers) and collect CSV rows."""
    rows = []
    first_failure = None
    for name, outcome in results:
        if isinstance(outcome, FsbenchError):
            write_text_atomic(out / f"{name}.failed", f"{type(outcome).__name__}: {outcome}\n")
            _log(f"[{name}] FAILED: {outcome}")
            if first_failure is None:
                first_failure = outcome
            continue
        summary: RunSummary = outcome
        write_text_atomic(out / f"{name}.json", summary_to_json(summary, config_hash=chash))
        protocol = (protocol_by_name or {}).get(name, "")
        rows.append(summary_csv_row(summary, protocol=protocol, config_hash=chash))
        _log(f"[{name}] {summary.display} ({summary.duration_s:.2f}s)")
    return rows, first_failure


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    datasets = _load_embeddings(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)
    episodes = cfg.episodes if cfg.episodes is not None else 100
    query_count = cfg.query_count if cfg.query_count is not None else 50

    cells = []
    for key in sorted(datasets):
        ds = datasets[key]
        ways = cfg.n_way if cfg.n_way is not None else (len(ds.class_names),)
        for n in ways:
            for m in cfg.shots:
                for mode in cfg.transforms:
                    name = f"{key}_{ds.backbone_name}_{n}way_{m}shot_{mode.value}"

                    def thunk(ds=ds, n=n, m=m, mode=mode):
                        return run_cell(
                            ds,
                            n_way=n,
                            m_shot=m,
                            mode=mode,
                            base_seed=cfg.seed,
                            episodes=episodes,
                            query_count=query_count,
                            stratified=cfg.stratified,
                        )

                    cells.append((name, thunk))

    results = _execute(cells, cfg.jobs)
    rows, first_failure = _emit_results(results, out, chash)
    write_text_atomic(out / "summary.csv", _csv_text(rows))
    if first_failure is not None:
        return first_failure.exit_code
    return 0


def cmd_cross(args) -> int:
    cfg = resolve_config(args, default_transforms=(TransformMode.L2N,))
    grids = select_protocols(cfg.protocols)
    if cfg.swap_direction:
        grids = tuple(g.swapped() for g in grids)
    needed = sorted({key for g in grids for key in g.datasets})
    datasets = _load_embeddings(cfg, required=needed)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)

    cells = []
    protocol_by_name = {}
    for grid in grids:
        episodes = cfg.episodes if cfg.episodes is not None else grid.episodes
        query_count = cfg.query_count if cfg.query_count is not None else grid.query_count
        validate_mapping(
            grid.mapping,
            [datasets[key] for key in grid.datasets],
            max_shot=max(m for _, m in grid.cells),
            allow_uncovered=grid.allow_uncovered,
        )
        mapped = {key: remap_labels(datasets[key], grid.mapping) for key in grid.datasets}
        for n, m in grid.cells:
            for mode in cfg.transforms:
                name = f"{grid.name}_{n}way_{m}shot_{mode.value}"
                protocol_by_name[name] = grid.name
                if grid.query is None or grid.query == grid.support:
                    data = mapped[grid.support]
                else:
                    data = (mapped[grid.support], mapped[grid.query])

                def thunk(data=data, n=n, m=m, mode=mode, episodes=episodes, q=query_count):
                    return run_cell(
                        data,
                        n_way=n,
                        m_shot=m,
                        mode=mode,
                        base_seed=cfg.seed,
                        episodes=episodes,
                        query_count=q,
                        stratified=cfg.stratified,
                    )

                cells.append((name, thunk))

    results = _execute(cells, cfg.jobs)
    rows, first_failure = _emit_results(results, out, chash, protocol_by_name)
    write_text_atomic(out / "cross_summary.csv", _csv_text(rows))
    if first_failure is not None:
        return first_failure.exit_code
    return 0


def cmd_inspect(args) -> int:
    ds = read_dataset(args.path)
    norms = np.linalg.norm(ds.vectors.astype(np.float64), axis=1)
    print(f"path: {args.path}")
    print(f"dataset: {ds.dataset_name}")
    print(f"backbone: {ds.backbone_name}")
    print(f"dim: {ds.dim}")
    print(f"count: {ds.count}")
    print(f"image_size: {ds.image_size}")
    print(f"preprocess: {ds.preprocess or '(none)'}")
    print("classes:")
    for name, count in zip(ds.class_names, ds.class_counts()):
        print(f"  {name}: {count}")
    print(
        "vector norms: "
        f"min={norms.min():.6f} mean={norms.mean():.6f} max={norms.max():.6f}"
    )
    return 0


def _load_reports(report_dir: Path) -> list:
    docs = []
    for path in sorted(report_dir.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if isinstance(doc, dict) and doc.get("report") == "run_summary":
            docs.append(doc)
    return docs


def cmd_plotdata(args) -> int:
    report_dir = Path(args.report_dir)
    if not report_dir.is_dir():
        raise ConfigError(f"report directory not found: {report_dir}")
    docs = _load_reports(report_dir)
    if not docs:
        raise ConfigError(f"no run summaries found in {report_dir}")
    out = Path(args.out) if args.out else report_dir
    out.mkdir(parents=True, exist_ok=True)

    all_shots = sorted({doc["cell"]["m_shot"] for doc in docs})
    groups: dict = {}
    for doc in docs:
        cell = doc["cell"]
        key = (
            cell["support_dataset"],
            cell["query_dataset"] or "",
            cell["backbone"],
            cell["transform"],
            cell["n_way"],
        )
        groups.setdefault(key, {})[cell["m_shot"]] = doc

    scaling = io.StringIO()
    writer = csv.writer(scaling, lineterminator="\n")
    writer.writerow(
        [
            "support_dataset",
            "query_dataset",
            "backbone",
            "transform",
            "n_way",
            "m_shot",
            "mean",
            "half_width",
            "status",
        ]
    )
    for key in sorted(groups):
        per_shot = groups[key]
        for m in all_shots:
            doc = per_shot.get(m)
            if doc is None:
                # flag the gap rather than inventing a value
                writer.writerow([*key, m, "", "", "missing"])
            else:
                acc = doc["accuracy"]
                writer.writerow([*key, m, acc["mean_fixed"], acc["half_width_fixed"], "ok"])
    write_text_atomic(out / "shot_scaling.csv", scaling.getvalue())

    classwise = io.StringIO()
    writer = csv.writer(classwise, lineterminator="\n")
    writer.writerow(
        [
            "support_dataset",
            "query_dataset",
            "backbone",
            "transform",
            "n_way",
            "m_shot",
            "class_name",
            "mean",
            "half_width",
            "episodes",
        ]
    )
    for doc in docs:
        cell = doc["cell"]
        for name in doc["class_names"]:
            entry = doc["per_class"][name]
            writer.writerow(
                [
                    cell["support_dataset"],
                    cell["query_dataset"] or "",
                    cell["backbone"],
                    cell["transform"],
                    cell["n_way"],
                    cell["m_shot"],
                    name,
                    entry["mean_fixed"] or "",
                    entry["half_width_fixed"] or "",
                    entry["episodes"],
                ]
            )
    write_text_atomic(out / "classwise.csv", classwise.getvalue())
    _log(f"wrote {out / 'shot_scaling.csv'} and {out / 'classwise.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
