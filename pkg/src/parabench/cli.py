"""Command-line entry point: generate, score, aggregate, report, serve.

One TOML config file describes backends, pipelines, paths, and the overlap
policy; every command takes it via --config. Exit codes are fixed so shells
and CI can branch: 0 success, 1 runtime failure, 2 usage/config error,
3 partial success (some records failed).
"""

import argparse
import json
import signal
import sys
import threading
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .annotation import (
    AnnotationStore,
    Journal,
    JournalCorruptionError,
    OverlapPolicy,
    agreement_kappa,
    aggregate,
    pairs_from_candidates,
)
from .backends import BackendConfig, BeamParams, build_registry
from .corpus import (
    METRIC_NAMES,
    PIPELINES,
    CorpusFormatError,
    SynonymLexicon,
    load_pairs_tsv,
    load_synonyms_csv,
    read_candidates_jsonl,
    write_candidates_jsonl,
)
from .metrics import score_corpus
from .pipelines import PipelineSpec, run_batch
from .report import FORMATS, build_report, render
from .service import serve
from .synonyms import ReplacementPolicy

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    backends: list[BackendConfig]
    pipelines: dict[str, dict]
    policy: OverlapPolicy
    paths: dict[str, Path]


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    base = path.parent

    backends = []
    for i, raw in enumerate(data.get("backends", [])):
        try:
            backends.append(
                BackendConfig(
                    id=raw.get("id", ""),
                    kind=raw.get("kind", ""),
                    endpoint=raw.get("endpoint", ""),
                    timeout=float(raw.get("timeout", 30.0)),
                    max_retries=int(raw.get("max_retries", 3)),
                    cache_dir=(
                        _resolve(base, raw["cache_dir"]) if "cache_dir" in raw else None
                    ),
                    bearer_token=raw.get("bearer_token"),
                )
            )
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"backends[{i}]: {exc}") from exc
    ids = [b.id for b in backends]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate backend ids")

    pipelines = data.get("pipelines", {})
    for pipeline_id, raw in pipelines.items():
        if pipeline_id not in PIPELINES:
            raise ConfigError(
                f"unknown pipeline {pipeline_id!r}; valid: {list(PIPELINES)}"
            )
        for key in ("translate_backend", "paraphrase_backend"):
            ref = raw.get(key)
            if ref is not None and ref not in ids:
                raise ConfigError(f"pipelines.{pipeline_id}.{key}: no backend {ref!r}")

    try:
        policy_raw = data.get("policy", {})
        policy = OverlapPolicy(
            target_overlap=int(policy_raw.get("target_overlap", 5)),
            min_votes=int(policy_raw.get("min_votes", 3)),
            threshold=float(policy_raw.get("threshold", 0.8)),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"policy: {exc}") from exc

    paths = {k: _resolve(base, v) for k, v in data.get("paths", {}).items()}
    declared = list(paths.values())
    if len(set(declared)) != len(declared):
        raise ConfigError("paths must be distinct")

    return RunConfig(backends=backends, pipelines=pipelines, policy=policy, paths=paths)


def _beam_params(raw: dict) -> BeamParams:
    return BeamParams(
        num_beams=int(raw.get("num_beams", 4)),
        num_return_sequences=int(raw.get("num_return_sequences", 1)),
        early_stopping=bool(raw.get("early_stopping", True)),
    )


def build_pipeline_spec(
    config: RunConfig, pipeline_id: str, lexicon: SynonymLexicon | None = None
) -> PipelineSpec:
    if pipeline_id not in config.pipelines:
        raise ConfigError(f"pipeline {pipeline_id!r} not configured")
    raw = config.pipelines[pipeline_id]
    policy = None
    if pipeline_id == "m2":
        if lexicon is None:
            raise ConfigError("pipeline m2 needs a synonyms file (paths.synonyms)")
        policy = ReplacementPolicy(
            mode=raw.get("mode", "deterministic"),
            probability=float(raw.get("probability", 0.5)),
            seed=int(raw.get("seed", 0)),
        )
    return PipelineSpec(
        id=pipeline_id,
        translate_backend=raw.get("translate_backend", ""),
        paraphrase_backend=raw.get("paraphrase_backend"),
        lexicon=lexicon if pipeline_id == "m2" else None,
        policy=policy,
        params=_beam_params(raw),
    )


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        if args.pipeline not in PIPELINES:
            raise ConfigError(
                f"unknown pipeline {args.pipeline!r}; valid: {list(PIPELINES)}"
            )
        if args.sample is not None and args.seed is None:
            raise ConfigError("--sample requires --seed")
        pairs_path = args.pairs or config.paths.get("pairs")
        if pairs_path is None:
            raise ConfigError("no pairs file (--pairs or paths.pairs)")
        pairs = load_pairs_tsv(pairs_path)
        lexicon = None
        if args.pipeline == "m2":
            synonyms_path = config.paths.get("synonyms")
            if synonyms_path is None:
                raise ConfigError("pipeline m2 needs paths.synonyms")
            lexicon, _ = load_synonyms_csv(synonyms_path)
        spec = build_pipeline_spec(config, args.pipeline, lexicon)
        registry = build_registry(config.backends)
        out_path = args.out or config.paths.get("candidates")
        if out_path is None:
            raise ConfigError("no output file (--out or paths.candidates)")
    except (ConfigError, CorpusFormatError, ValueError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    try:
        records = run_batch(
            pairs, spec, registry,
            sample=args.sample, seed=args.seed, parallel=args.parallel,
        )
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        write_candidates_jsonl(records, out_path)
    except (ValueError, OSError) as exc:
        return _fail(str(exc), EXIT_FAILURE)

    failures = [r for r in records if not r.ok]
    print(f"wrote {len(records)} records to {out_path}")
    if failures:
        for record in failures:
            print(f"failed {record.pipeline}:{record.id}: {record.error}",
                  file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    unknown = [m for m in metrics if m not in METRIC_NAMES]
    if unknown or not metrics:
        return _fail(
            f"unknown metric(s) {unknown}; valid: {list(METRIC_NAMES)}", EXIT_USAGE
        )
    try:
        records = read_candidates_jsonl(args.infile)
    except (CorpusFormatError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    scored = score_corpus(records, set(metrics))
    out_path = args.out or args.infile
    try:
        write_candidates_jsonl(scored.records, out_path)
    except OSError as exc:
        return _fail(str(exc), EXIT_FAILURE)

    for pipeline, means in sorted(scored.means.items()):
        parts = " ".join(f"{m}={means[m]:.6f}" for m in METRIC_NAMES if m in means)
        print(f"{pipeline}: {parts}")
    if scored.skipped:
        print(f"skipped {scored.skipped} record(s) with empty text", file=sys.stderr)
    print(f"wrote {len(scored.records)} records to {out_path}")
    return EXIT_OK


def _read_labels_jsonl(path: Path):
    from .annotation import AggregatedLabel

    labels = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                labels.append(
                    AggregatedLabel(
                        pair_id=obj["pair_id"],
                        votes_paraphrase=obj["votes_paraphrase"],
                        votes_not=obj["votes_not"],
                        votes_total=obj["votes_total"],
                        high_confidence_correct=obj["high_confidence_correct"],
                    )
                )
            except (ValueError, KeyError) as exc:
                raise CorpusFormatError(lineno, str(exc), Path(path)) from exc
    return labels


def cmd_aggregate(args: argparse.Namespace) -> int:
    policy = OverlapPolicy()
    pair_ids = None
    try:
        if not Path(args.journal).is_file():
            raise ConfigError(f"journal file not found: {args.journal}")
        if args.config:
            config = load_config(args.config)
            policy = config.policy
            candidates_path = config.paths.get("candidates")
            if candidates_path and Path(candidates_path).is_file():
                records = read_candidates_jsonl(candidates_path)
                pair_ids = [p.id for p in pairs_from_candidates(records)]
        recovered = Journal(args.journal).recover()
    except (ConfigError, CorpusFormatError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except JournalCorruptionError as exc:
        return _fail(f"journal corrupt: {exc}", EXIT_FAILURE)

    result = aggregate(recovered.judgments, policy, pair_ids=pair_ids)
    if args.out:
        try:
            with Path(args.out).open("w", encoding="utf-8") as fh:
                for label in result.labels:
                    fh.write(json.dumps(label.to_json_obj(), ensure_ascii=False) + "\n")
        except OSError as exc:
            return _fail(str(exc), EXIT_FAILURE)
        print(f"wrote {len(result.labels)} labels to {args.out}")
    for pipeline, rate in result.rates.items():
        print(f"{pipeline}: human_rate={rate:.6f}")
    try:
        kappa = agreement_kappa(recovered.judgments)
        print(f"fleiss_kappa={kappa:.6f}" if kappa is not None
              else "fleiss_kappa=undefined")
    except ValueError as exc:
        print(f"fleiss_kappa unavailable: {exc}", file=sys.stderr)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if args.format not in FORMATS:
        return _fail(f"unknown format {args.format!r}; valid: {list(FORMATS)}",
                     EXIT_USAGE)
    try:
        records = read_candidates_jsonl(args.scores)
        labels = _read_labels_jsonl(args.labels)
    except (CorpusFormatError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    text = render(build_report(records, labels), args.format)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            return _fail(str(exc), EXIT_FAILURE)
        print(f"wrote report to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        candidates_path = config.paths.get("candidates")
        if candidates_path is None:
            raise ConfigError("serve needs paths.candidates")
        journal_path = config.paths.get("journal")
        if journal_path is None:
            raise ConfigError("serve needs paths.journal")
        records = read_candidates_jsonl(candidates_path)
        pairs = pairs_from_candidates(records)
    except (ConfigError, CorpusFormatError, OSError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)

    try:
        store = AnnotationStore(pairs, config.policy, Journal(journal_path))
    except JournalCorruptionError as exc:
        return _fail(f"refusing to start, journal corrupt: {exc}", EXIT_FAILURE)
    if store.recovered and store.recovered.quarantined is not None:
        print("quarantined a truncated journal line", file=sys.stderr)

    try:
        server = serve(store, host=args.host, port=args.port, static_dir=args.static)
    except OSError as exc:
        return _fail(f"cannot bind {args.host}:{args.port}: {exc}", EXIT_FAILURE)

    # SIGINT/SIGTERM stop the server via shutdown() instead of an async
    # KeyboardInterrupt, which could land anywhere (even mid-print)
    def _stop(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGINT, _stop)
    signal.signal(signal.SIGTERM, _stop)

    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}/ (journal: {journal_path})")
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parabench",
        description="Malayalam paraphrase pipelines, metrics, and judgment service",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="run a pipeline over the pairs corpus")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--pipeline", required=True)
    p.add_argument("--pairs", type=Path, help="override paths.pairs")
    p.add_argument("--sample", type=int, help="sample size (requires --seed)")
    p.add_argument("--seed", type=int)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--out", type=Path, help="override paths.candidates")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("score", help="fill metric scores into candidates JSONL")
    p.add_argument("--in", dest="infile", required=True, type=Path)
    p.add_argument("--metrics", default=",".join(METRIC_NAMES))
    p.add_argument("--out", type=Path, help="default: rewrite --in")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("aggregate", help="aggregate a judgment journal")
    p.add_argument("--journal", required=True, type=Path)
    p.add_argument("--config", type=Path, help="policy + pair universe")
    p.add_argument("--out", type=Path, help="write AggregatedLabel JSONL")
    p.set_defaults(fn=cmd_aggregate)

    p = sub.add_parser("report", help="render the summary table")
    p.add_argument("--scores", required=True, type=Path)
    p.add_argument("--labels", required=True, type=Path)
    p.add_argument("--format", default="markdown")
    p.add_argument("--out", type=Path)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--static", type=Path, help="serve UI assets from this directory")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


def main_entry() -> None:
    sys.exit(main())
