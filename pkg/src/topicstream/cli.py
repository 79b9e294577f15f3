"""``topicstream`` command line: build-bk, detect, sweep, eval, synth.

Exit status is 0 on success, 1 for usage or configuration problems and 2
for unreadable or inconsistent data.
"""
from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from . import __version__
from .background import build_model_dir
from .config import KeyValueFile, load_config
from .errors import ConfigError, DataError, TopicStreamError
from .evaluation import GoldenStandard, fs_scores, load_golden, topic_prf
from .pipeline import (
    METHODS,
    Detector,
    RunConfig,
    canonical_param,
    load_resources,
    prepare_windows,
    run,
    run_detector,
    topic_silhouette,
)
from .stream import ingest_posts
from .sweep import LOWER_IS_BETTER, expand_grid, tune_parameter, write_report
from .synth import SynthConfig, generate, write_corpus
from .topics import Topic

log = logging.getLogger("topicstream")

OUTPUT_FORMAT = 1
EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
_PATH_KEYS = ("posts", "models", "embeddings", "stopwords", "lexicon", "golden", "catalog")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2, which is reserved for data errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False)


@contextmanager
def _open_out(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"expected name=value, got {text!r}")
    return key.strip(), value.strip()


# --------------------------------------------------------------------------
# run configuration from file + flags


def _settings(args) -> tuple[dict[str, str], dict[str, str], dict[str, str]]:
    """Merge the config file (if any) with command-line overrides.

    Returns ``(settings, params, ranges)`` with paths already resolved.
    """
    kv = load_config(args.config) if getattr(args, "config", None) else KeyValueFile()
    settings = {k: v for k, v in kv.values.items() if "." not in k}
    for key in _PATH_KEYS:
        if settings.get(key):
            settings[key] = str((kv.base / settings[key]).resolve()) if not Path(settings[key]).is_absolute() else settings[key]
    params, ranges = kv.section("param"), kv.section("range")
    for key in ("method", "posts", "models", "embeddings", "stopwords", "lexicon", "window", "seed",
                "golden", "catalog", "criterion"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = str(value)
    for item in getattr(args, "param", None) or []:
        k, v = _key_value(item)
        params[k] = v
    for item in getattr(args, "range", None) or []:
        k, v = _key_value(item)
        ranges[k] = v
    return settings, params, ranges


def _int(settings: dict, key: str, default: int) -> int:
    try:
        return int(settings.get(key, default))
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {settings[key]!r}") from None


def _run_config(settings: dict, params: dict) -> RunConfig:
    if not settings.get("method"):
        raise ConfigError(f"no method given; choose from {', '.join(METHODS)}")
    path = lambda k: Path(settings[k]) if settings.get(k) else None  # noqa: E731
    return RunConfig(
        method=settings["method"],
        posts=path("posts"),
        models=path("models"),
        embeddings=path("embeddings"),
        stopwords=path("stopwords"),
        lexicon=path("lexicon"),
        window_seconds=_int(settings, "window", 3600),
        params=params,
        seed=_int(settings, "seed", 42),
    )


def _load_golden(settings: dict) -> GoldenStandard:
    if not settings.get("golden"):
        raise ConfigError("a golden standard file is required")
    return load_golden(settings["golden"], settings.get("catalog"))


# --------------------------------------------------------------------------
# commands


def cmd_build_bk(args) -> int:
    meta = build_model_dir(args.corpus, args.out, anchor_tsv=args.anchors, ref_corpus_paths=args.ref or None,
                           n_max=args.n_max)
    report = {"out": str(args.out), **meta}
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_detect(args) -> int:
    settings, params, _ = _settings(args)
    cfg = _run_config(settings, params)
    if cfg.posts is None:
        raise ConfigError("no posts file given")
    resources = load_resources(cfg)  # missing models fail here, before any window is processed
    posts = ingest_posts(cfg.posts).posts
    results = run(cfg, posts=posts, resources=resources)
    with _open_out(args.out) as fh:
        header = {"type": "header", "format": OUTPUT_FORMAT, **cfg.header(), "n_windows": len(results),
                  "n_posts": len(posts)}
        fh.write(_dump(header) + "\n")
        for r in results:
            fh.write(_dump({"type": "window", **r.to_record(cfg.method)}) + "\n")
    log.info("%s: %d windows, %d topics", cfg.method, len(results), sum(len(r.topics) for r in results))
    return EXIT_OK


def _window_score(criterion: str, batch, topics: list[Topic], golden: GoldenStandard | None, table) -> float:
    c = criterion.lower()
    if c == "silhouette":
        return topic_silhouette(batch, topics, table)
    if c in LOWER_IS_BETTER:
        s = fs_scores(topics, golden)
        return {"classfs": s.class_fs, "class_fs": s.class_fs, "clusterfs": s.cluster_fs,
                "cluster_fs": s.cluster_fs}.get(c, s.mean_fs)
    if c in ("f", "topic_f", "recall", "precision"):
        prf = topic_prf(topics, golden.catalog)
        return {"recall": prf.recall, "precision": prf.precision}.get(c, prf.f)
    raise ConfigError(f"unknown criterion {criterion!r}")


def cmd_sweep(args) -> int:
    settings, params, ranges = _settings(args)
    if not ranges:
        raise ConfigError("nothing to sweep: give at least one range")
    base = _run_config(settings, params)
    ranges = {canonical_param(base.method, k): v for k, v in ranges.items()}
    expand_grid(ranges)  # syntax errors surface here, before any run
    criterion = settings.get("criterion", "silhouette")
    golden = _load_golden(settings) if criterion.lower() != "silhouette" else None
    if base.posts is None:
        raise ConfigError("no posts file given")
    resources = load_resources(base)
    batches = [b for b in prepare_windows(ingest_posts(base.posts).posts, resources.stopwords, base.window_seconds)
               if b.posts]

    def evaluate(values: dict) -> float:
        cfg = base.with_params(**values)
        results = run_detector(Detector(cfg.method, cfg.params, resources, cfg.seed), batches)
        scores = []
        for r in results:
            try:
                scores.append(_window_score(criterion, r.batch, r.topics, golden, resources.table))
            except ValueError as exc:
                log.debug("window %d: %s", r.batch.index, exc)
        if not scores:
            raise ValueError(f"{criterion} undefined in every window")
        return statistics.fmean(scores)

    result = tune_parameter(evaluate, ranges, criterion)
    if args.report:
        write_report(result, args.report)
    best = {"method": base.method, "criterion": criterion, "best": result.best, "score": result.best_score,
            "runs": len(result.table), "missing": result.missing}
    with _open_out(args.out) as fh:
        fh.write(json.dumps(best, ensure_ascii=False, sort_keys=True) + "\n")
    return EXIT_OK if result.best is not None else EXIT_DATA


def read_topics_file(path: str | Path) -> tuple[dict, list[tuple[int, list[Topic]]]]:
    header, windows = None, []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read topics file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                if rec.get("type") == "header":
                    header = rec
                    continue
                windows.append((int(rec["window"]), [Topic.from_record(t) for t in rec["topics"]]))
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise DataError(f"{path}:{lineno}: bad topics record ({exc})") from exc
    if header is None:
        raise DataError(f"{path}: missing header record")
    return header, windows


def evaluate_windows(windows: Sequence[tuple[int, list[Topic]]], golden: GoldenStandard, theta: float = 0.5) -> dict:
    """Per-window topic P/R/F and FS scores, plus their means over windows."""
    per_window = []
    for index, topics in windows:
        prf = topic_prf(topics, golden.catalog, theta)
        rec = {"window": index, "n_topics": len(topics), **prf.as_dict()}
        try:
            rec.update(fs_scores(topics, golden).as_dict())
        except ValueError:
            rec.update({"class_fs": None, "cluster_fs": None, "mean_fs": None,
                        "unlabeled": sum(len(t.post_ids) for t in topics)})
        per_window.append(rec)

    def mean(key):
        vals = [r[key] for r in per_window if r[key] is not None]
        return statistics.fmean(vals) if vals else None

    keys = ("precision", "recall", "f", "class_fs", "cluster_fs", "mean_fs")
    overall = {k: mean(k) for k in keys}
    overall["min_recall"] = min((r["recall"] for r in per_window), default=None)
    overall["unlabeled"] = sum(r["unlabeled"] for r in per_window)
    overall["n_windows"] = len(per_window)
    return {"windows": per_window, "overall": overall}


def cmd_eval(args) -> int:
    settings, _, _ = _settings(args)
    golden = _load_golden(settings)
    if not golden.catalog:
        raise ConfigError("topic precision/recall needs a class catalog (--catalog)")
    header, windows = read_topics_file(args.topics)
    report = {"method": header.get("method"), **evaluate_windows(windows, golden, args.theta)}
    if report["overall"]["unlabeled"]:
        log.warning("%d topic memberships refer to posts without a golden label", report["overall"]["unlabeled"])
    with _open_out(args.out) as fh:
        fh.write(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(n_topics=args.topics, posts_per_topic=args.posts_per_topic, n_windows=args.windows,
                          noise_rate=args.noise, seed=args.seed, dim=args.dim, window_seconds=args.window)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    paths = write_corpus(generate(cfg), args.out)
    print(json.dumps({k: str(v) for k, v in paths.items()} | {"config": asdict(cfg)}, indent=2, sort_keys=True))
    return EXIT_OK


# --------------------------------------------------------------------------


def _run_flags(p: argparse.ArgumentParser, golden: bool = False) -> None:
    p.add_argument("--config", help="key = value run file")
    p.add_argument("--method", choices=METHODS, type=str.upper)
    p.add_argument("--posts", help="posts JSONL")
    p.add_argument("--models", help="background model directory")
    p.add_argument("--embeddings", help="word-vector text file")
    p.add_argument("--stopwords")
    p.add_argument("--lexicon", help="compound lexicon, one phrase per line")
    p.add_argument("--window", type=int, help="window length in seconds")
    p.add_argument("--seed", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="method parameter (repeatable)")
    if golden:
        p.add_argument("--golden")
        p.add_argument("--catalog")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topicstream", description="Topic detection over timestamped post streams.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-bk", help="count n-grams, anchors and reference frequencies into a model directory")
    p.add_argument("--corpus", action="append", required=True, help="tokenised text, one document per line")
    p.add_argument("--anchors", help="anchor-text TSV: phrase<TAB>count")
    p.add_argument("--ref", action="append", help="reference corpus for term scoring (default: the n-gram corpus)")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_bk)

    p = sub.add_parser("detect", help="run one method over a stream")
    _run_flags(p)
    p.add_argument("--out", help="topics JSONL (default stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="grid-search method parameters")
    _run_flags(p, golden=True)
    p.add_argument("--range", action="append", metavar="NAME=RANGE", help="e.g. k=20:10:90&100:50:300")
    p.add_argument("--criterion", help="silhouette (default), meanfs, classfs, clusterfs or f")
    p.add_argument("--report", help="CSV with every run")
    p.add_argument("--out", help="best-parameter JSON (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="score a topics file against a golden standard")
    p.add_argument("--config")
    p.add_argument("--topics", required=True)
    p.add_argument("--golden")
    p.add_argument("--catalog")
    p.add_argument("--theta", type=float, default=0.5, help="share of title words that must match a class")
    p.add_argument("--out", help="metrics JSON (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic planted-topic stream with its golden standard")
    p.add_argument("--out", required=True)
    p.add_argument("--topics", type=int, default=3)
    p.add_argument("--posts-per-topic", type=int, default=30)
    p.add_argument("--windows", type=int, default=5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--window", type=int, default=3600)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code or EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"topicstream: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TopicStreamError, OSError, UnicodeDecodeError) as exc:
        print(f"topicstream: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
