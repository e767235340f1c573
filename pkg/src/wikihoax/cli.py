"""Command-line pipeline runner.

Subcommands wire the library into reproducible runs: ingest (fetch
timelines or extracts for a title list), negsample (embedding file to
negative id set), split (corpus to train/test manifest), stylometry
(corpus to group style reports), timeline (timelines to dense regions,
quartiles, histograms, changepoints), classify (timelines to a trained
model plus evaluation report), and eval (predictions plus gold to a
report).

Exit codes: 0 success, 1 validation or usage error, 2 I/O or network
error. Every artifact embeds format_version and the effective
configuration; flags override config-file entries, which override
defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, corpus, ingest, metrics, negsample, stylometry, timeclf, timeline

log = logging.getLogger("wikihoax")

FORMAT_VERSION = 1

VIEW_NAMES = {
    "definition": corpus.DEFINITION,
    "fulltext": corpus.FULL_TEXT,
    "fulltext-nodef": corpus.FULL_TEXT_NO_DEFINITION,
}


class _UsageError(Exception):
    def __init__(self, parser, message):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract reserves 2 for I/O
    # and network failures, so usage problems are turned into exit 1.
    def error(self, message):
        raise _UsageError(self, message)


@dataclass(frozen=True)
class Arg:
    name: str
    kind: object = str  # converter callable, or bool for a store_true flag
    default: object = None
    required: bool = False
    choices: tuple = ()
    help: str = ""

    @property
    def dest(self) -> str:
        return self.name.lstrip("-").replace("-", "_")


def _bandwidth_value(text: str):
    return text if text == "auto" else float(text)


GLOBAL_ARGS = (
    Arg("--config", help="key = value file; command-line flags override it"),
    Arg("--log-level", default="warning",
        choices=("debug", "info", "warning", "error"), help="stderr log level"),
    Arg("--workers", kind=int, default=os.cpu_count() or 1,
        help="worker pool size for per-article work"),
)

COMMANDS: dict = {}


def command(name: str, help_text: str, args: tuple):
    def register(fn):
        COMMANDS[name] = (fn, args, help_text)
        return fn

    return register


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------

def _read_id_lines(path) -> list:
    with open(path, encoding="utf-8") as fh:
        ids = [line.strip() for line in fh if line.strip()]
    if not ids:
        raise ValueError(f"{path}: no ids found")
    return ids


def _read_negative_ids(path) -> list:
    """Accepts the negsample artifact, a bare JSON list, or one id per line."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    head = text.lstrip()[:1]
    if head == "{":
        doc = json.loads(text)
        if "negatives" not in doc:
            raise ValueError(f"{path}: JSON object has no 'negatives' key")
        return list(doc["negatives"])
    if head == "[":
        return list(json.loads(text))
    ids = [line.strip() for line in text.splitlines() if line.strip()]
    if not ids:
        raise ValueError(f"{path}: no ids found")
    return ids


def _read_label_file(path) -> dict:
    """Line-delimited JSON rows {id, label} -> id to label mapping."""
    labels: dict = {}
    lines: dict = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {n}: invalid JSON ({exc.msg})")
            if not isinstance(row, dict):
                raise ValueError(f"{path}: line {n}: expected an object")
            for field_name in ("id", "label"):
                if field_name not in row:
                    raise ValueError(f"{path}: line {n}: missing {field_name}")
            rid = row["id"]
            if rid in labels:
                raise ValueError(
                    f"{path}: duplicate id '{rid}' on lines {lines[rid]} and {n}"
                )
            if row["label"] not in (0, 1):
                raise ValueError(f"{path}: line {n}: label must be 0 or 1")
            labels[rid] = row["label"]
            lines[rid] = n
    if not labels:
        raise ValueError(f"{path}: no rows found")
    return labels


def _write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _echo(name: str, cfg: dict) -> dict:
    out = {k: v for k, v in sorted(cfg.items()) if k != "config"}
    out["command"] = name
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

@command("split", "build a stratified train/test manifest from a corpus", (
    Arg("--corpus", required=True, help="corpus file, line-delimited JSON"),
    Arg("--negatives",
        help="negative id file (negsample output, JSON list, or one per line); "
             "defaults to every legitimate article"),
    Arg("--ratio", required=True, choices=tuple(corpus.RATIOS)),
    Arg("--view", default="fulltext", choices=tuple(VIEW_NAMES)),
    Arg("--seed", kind=int, default=0),
    Arg("--test-fraction", kind=float, default=0.3),
    Arg("--output", required=True, help="manifest path"),
))
def cmd_split(cfg: dict) -> int:
    articles = corpus.load_corpus(cfg["corpus"])
    if cfg["negatives"]:
        negatives = _read_negative_ids(cfg["negatives"])
    else:
        negatives = [a.id for a in articles if a.label == corpus.LEGITIMATE]
    ratio = corpus.parse_ratio(cfg["ratio"])
    split = corpus.make_split(
        articles, negatives, ratio, VIEW_NAMES[cfg["view"]],
        seed=cfg["seed"], test_fraction=cfg["test_fraction"],
    )
    corpus.write_split_manifest(split, cfg["output"], config=_echo("split", cfg))
    log.info("split: %d train / %d test -> %s",
             len(split.train), len(split.test), cfg["output"])
    return 0


@command("negsample", "select topic-matched negative ids from title embeddings", (
    Arg("--embeddings", required=True, help="embedding file (dim/count header)"),
    Arg("--hoax-ids", required=True, help="hoax id file, one per line"),
    Arg("--k", kind=int, default=2, help="negatives per hoax before dedup"),
    Arg("--output", required=True, help="negative set JSON path"),
))
def cmd_negsample(cfg: dict) -> int:
    records = negsample.load_embeddings(cfg["embeddings"])
    hoax_ids = _read_id_lines(cfg["hoax_ids"])
    by_id = {r.id: r for r in records}
    absent = [h for h in hoax_ids if h not in by_id]
    if absent:
        raise ValueError(f"hoax ids missing from embedding file: {absent[:5]}")
    hoax_set = set(hoax_ids)
    hoaxes = [by_id[h] for h in hoax_ids]
    candidates = [r for r in records if r.id not in hoax_set]
    negatives = negsample.build_negative_set(hoaxes, candidates, cfg["k"])
    _write_json({
        "format_version": FORMAT_VERSION,
        "kind": "negatives",
        "config": _echo("negsample", cfg),
        "negatives": sorted(negatives),
    }, cfg["output"])
    log.info("negsample: %d unique negatives -> %s", len(negatives), cfg["output"])
    return 0


@command("stylometry", "compare surface style between hoax and legitimate articles", (
    Arg("--corpus", required=True),
    Arg("--bins", kind=int, default=20, help="histogram bins per metric"),
    Arg("--output", required=True, help="style report JSON path"),
))
def cmd_stylometry(cfg: dict) -> int:
    articles = corpus.load_corpus(cfg["corpus"])
    hoaxes = [a for a in articles if a.label == corpus.HOAX]
    legit = [a for a in articles if a.label == corpus.LEGITIMATE]
    hoax_stats = stylometry.batch_style_stats(hoaxes, workers=cfg["workers"])
    legit_stats = stylometry.batch_style_stats(legit, workers=cfg["workers"])
    hoax_rep, legit_rep = stylometry.compare_groups(hoax_stats, legit_stats,
                                                    bins=cfg["bins"])

    def group_doc(report, stats):
        return {
            "medians": report.medians,
            "histograms": report.histograms,
            "articles": [vars(s) for s in stats],
        }

    _write_json({
        "format_version": FORMAT_VERSION,
        "kind": "style-report",
        "config": _echo("stylometry", cfg),
        "groups": {
            "hoax": group_doc(hoax_rep, hoax_stats),
            "legitimate": group_doc(legit_rep, legit_stats),
        },
    }, cfg["output"])
    log.info("stylometry: %d hoax / %d legitimate -> %s",
             len(hoax_stats), len(legit_stats), cfg["output"])
    return 0


@command("timeline", "revision-timeline forensics: regions, quartiles, changepoints", (
    Arg("--input", required=True, help="timelines file, line-delimited JSON"),
    Arg("--outdir", required=True, help="directory for the CSV/JSON artifacts"),
    Arg("--threshold-ratio", kind=float, default=0.5,
        help="dense-region threshold as a fraction of peak density"),
    Arg("--bandwidth", kind=_bandwidth_value, default="auto",
        help="KDE bandwidth in days, or 'auto'"),
    Arg("--hazard", kind=float, default=100.0,
        help="expected months between changepoints"),
    Arg("--bins", kind=int, default=10, help="density histogram bins"),
))
def cmd_timeline(cfg: dict) -> int:
    timelines = timeline.load_timelines(cfg["input"])
    outdir = Path(cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    echo = _echo("timeline", cfg)

    region_rows = []
    quartile_rows = []
    changepoint_rows = []
    for tl in timelines:
        grid = timeline.kde_density(tl, bandwidth=cfg["bandwidth"])
        regions = timeline.dense_regions(grid, threshold_ratio=cfg["threshold_ratio"])
        region_rows.append((tl.article_id, regions))
        if tl.timestamps[0] == tl.timestamps[-1]:
            log.warning("article '%s': zero-span timeline, no quartiles",
                        tl.article_id)
        else:
            dist = timeline.quartile_distribution(regions, tl)
            quartile_rows.append((tl.article_id, tl.label, dist))
        series = timeline.bin_by_month(tl)
        if len(series.counts) >= 2:
            cps = timeline.bocpd(series, hazard_lambda=cfg["hazard"])
            changepoint_rows.append((tl.article_id, cps))
        else:
            log.warning("article '%s': single-month timeline, no changepoints",
                        tl.article_id)

    aggregated = timeline.aggregate_quartiles(
        [(label, dist) for _, label, dist in quartile_rows]
    )
    histograms = timeline.density_histogram(
        timelines, bins=cfg["bins"],
        threshold_ratio=cfg["threshold_ratio"], bandwidth=cfg["bandwidth"],
    )
    timeline.write_regions_csv(region_rows, outdir / "regions.csv")
    timeline.write_quartiles_csv(quartile_rows, aggregated, outdir / "quartiles.csv")
    timeline.write_histogram_csv(histograms, outdir / "histogram.csv")
    timeline.write_changepoints_json(changepoint_rows, outdir / "changepoints.json",
                                     config=echo)
    # CSV headers are pinned, so the run config rides in a sidecar.
    _write_json({
        "format_version": FORMAT_VERSION,
        "kind": "run-config",
        "config": echo,
    }, outdir / "config.json")
    log.info("timeline: %d articles -> %s", len(timelines), outdir)
    return 0


@command("classify", "train and evaluate the month-token timeline classifier", (
    Arg("--input", required=True, help="timelines file, line-delimited JSON"),
    Arg("--ratio", required=True, choices=tuple(corpus.RATIOS)),
    Arg("--seed", kind=int, default=0),
    Arg("--test-fraction", kind=float, default=0.3),
    Arg("--C", kind=float, default=1.0, help="inverse regularization strength"),
    Arg("--epochs", kind=int, default=200),
    Arg("--class-weighting", kind=bool, default=False,
        help="reweight the hinge loss inversely to class frequency"),
    Arg("--model-out", required=True),
    Arg("--report-out", required=True),
))
def cmd_classify(cfg: dict) -> int:
    timelines = timeline.load_timelines(cfg["input"])
    ratio = corpus.parse_ratio(cfg["ratio"])
    train_config = timeclf.TrainConfig(
        C=cfg["C"], epochs=cfg["epochs"], seed=cfg["seed"],
        class_weighting=cfg["class_weighting"],
    )
    result = timeclf.train_and_evaluate(
        timelines, ratio, seed=cfg["seed"], config=train_config,
        test_fraction=cfg["test_fraction"],
    )
    timeclf.save_model(result.model, result.tfidf, cfg["model_out"])
    metrics.write_report_json(result.report, cfg["report_out"],
                              config=_echo("classify", cfg))
    print(json.dumps({
        "setting": result.report.setting,
        "macro_f1": round(result.report.macro_f1, 6),
        "hoax_f1": round(result.report.per_class[1]["f1"], 6),
    }, sort_keys=True))
    return 0


@command("eval", "score predictions against gold labels", (
    Arg("--predictions", required=True, help="line-delimited JSON {id, label}"),
    Arg("--gold", required=True, help="line-delimited JSON {id, label}"),
    Arg("--setting", default="", help="free-form tag echoed into the report"),
    Arg("--output", help="report JSON path; stdout when omitted"),
))
def cmd_eval(cfg: dict) -> int:
    predictions = _read_label_file(cfg["predictions"])
    gold = _read_label_file(cfg["gold"])
    missing = sorted(set(gold) - set(predictions))
    if missing:
        raise ValueError(f"predictions missing {len(missing)} gold ids "
                         f"(first: {missing[:5]})")
    extra = sorted(set(predictions) - set(gold))
    if extra:
        raise ValueError(f"predictions contain {len(extra)} ids not in gold "
                         f"(first: {extra[:5]})")
    ids = sorted(gold)
    report = metrics.evaluate([predictions[i] for i in ids],
                              [gold[i] for i in ids], setting=cfg["setting"])
    if cfg["output"]:
        metrics.write_report_json(report, cfg["output"], config=_echo("eval", cfg))
    else:
        doc = metrics.report_to_dict(report)
        doc["config"] = _echo("eval", cfg)
        print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


@command("ingest", "fetch revision timelines or extracts for a title list", (
    Arg("--titles", required=True, help="line-delimited JSON {id, title, label?}"),
    Arg("--what", default="revisions", choices=("revisions", "extracts")),
    Arg("--timelines-out", help="write Ok revision results as a timelines file"),
    Arg("--corpus-out", help="write Ok extract results as a corpus file"),
    Arg("--base-url", default=ingest.DEFAULT_BASE_URL),
    Arg("--user-agent", default=ingest.DEFAULT_USER_AGENT),
    Arg("--rate", kind=float, default=1.0, help="requests per second"),
    Arg("--max-attempts", kind=int, default=5),
    Arg("--cache-dir", help="cache directory (or WIKIHOAX_CACHE_DIR)"),
    Arg("--timeout", kind=float, default=30.0),
))
def cmd_ingest(cfg: dict) -> int:
    rows = ingest.load_title_list(cfg["titles"])
    wants_labels = ((cfg["what"] == "revisions" and cfg["timelines_out"]) or
                    (cfg["what"] == "extracts" and cfg["corpus_out"]))
    if wants_labels:
        unlabeled = [r["id"] for r in rows if r["label"] is None]
        if unlabeled:
            raise ValueError(
                f"labeled output requested but {len(unlabeled)} title(s) have "
                f"no label (first: {unlabeled[:5]})"
            )
    client = ingest.WikiClient(ingest.ClientConfig(
        base_url=cfg["base_url"], user_agent=cfg["user_agent"], rate=cfg["rate"],
        max_attempts=cfg["max_attempts"], cache_dir=cfg["cache_dir"],
        timeout=cfg["timeout"],
    ))

    counts: dict = {}
    failures = []
    ok_rows = []
    for row in rows:
        page = ingest.WikiPageRef(row["title"])
        if cfg["what"] == "revisions":
            result = client.fetch_revision_timestamps(page)
        else:
            result = client.fetch_extract(page)
        counts[result.status.value] = counts.get(result.status.value, 0) + 1
        if result.status is ingest.FetchStatus.OK:
            ok_rows.append((row, result))
        elif result.status in (ingest.FetchStatus.RATE_LIMITED,
                               ingest.FetchStatus.NETWORK_ERROR):
            failures.append({"id": row["id"], "status": result.status.value,
                             "detail": result.detail})
        else:
            log.info("page '%s': %s", row["title"], result.status.value)

    if cfg["what"] == "revisions" and cfg["timelines_out"]:
        with open(cfg["timelines_out"], "w", encoding="utf-8") as fh:
            for row, result in ok_rows:
                fh.write(json.dumps({
                    "article_id": row["id"],
                    "label": row["label"],
                    "timestamps": result.payload,
                }, sort_keys=True) + "\n")
    if cfg["what"] == "extracts" and cfg["corpus_out"]:
        with open(cfg["corpus_out"], "w", encoding="utf-8") as fh:
            for row, result in ok_rows:
                if not result.payload.strip():
                    log.warning("page '%s': empty extract, skipped", row["title"])
                    continue
                fh.write(json.dumps({
                    "id": row["id"],
                    "title": row["title"],
                    "text": result.payload,
                    "label": row["label"],
                    "source": "WikipediaLive",
                }, sort_keys=True) + "\n")

    print(json.dumps({
        "format_version": FORMAT_VERSION,
        "kind": "ingest-summary",
        "config": _echo("ingest", cfg),
        "counts": counts,
        "failures": failures,
    }, sort_keys=True, indent=2))
    return 2 if failures else 0


# ---------------------------------------------------------------------------
# Parsing and dispatch
# ---------------------------------------------------------------------------

def _add_argument(parser, arg: Arg) -> None:
    kwargs = {"dest": arg.dest, "default": argparse.SUPPRESS, "help": arg.help}
    if arg.kind is bool:
        parser.add_argument(arg.name, action="store_true", **kwargs)
        return
    if arg.choices:
        kwargs["choices"] = arg.choices
    parser.add_argument(arg.name, type=arg.kind, **kwargs)


def build_parser() -> _Parser:
    parser = _Parser(prog="wikihoax", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (_, args, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for arg in GLOBAL_ARGS + args:
            _add_argument(sp, arg)
    return parser


def _read_config_file(path) -> dict:
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {n}: expected key = value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(arg: Arg, text: str, source: str):
    if arg.kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{source}: key '{arg.dest}': expected a boolean, got '{text}'")
    try:
        value = arg.kind(text)
    except ValueError:
        raise ValueError(f"{source}: key '{arg.dest}': cannot parse '{text}'")
    if arg.choices and value not in arg.choices:
        raise ValueError(
            f"{source}: key '{arg.dest}': '{value}' is not one of {list(arg.choices)}"
        )
    return value


def _effective_config(name: str, namespace, argspecs) -> dict:
    explicit = vars(namespace)
    cfg = {arg.dest: arg.default for arg in argspecs}
    by_dest = {arg.dest: arg for arg in argspecs}
    config_path = explicit.get("config")
    if config_path:
        for key, text in _read_config_file(config_path).items():
            if key == "config":
                raise ValueError(f"{config_path}: 'config' cannot nest config files")
            if key not in by_dest:
                raise ValueError(
                    f"{config_path}: unknown key '{key}' for command '{name}'"
                )
            cfg[key] = _coerce(by_dest[key], text, str(config_path))
    for key, value in explicit.items():
        if key in ("command", "config"):
            continue
        cfg[key] = value
    for arg in argspecs:
        if arg.required and cfg.get(arg.dest) is None:
            raise ValueError(f"command '{name}': missing required flag {arg.name}")
    cfg["config"] = config_path
    return cfg


def _setup_logging(cfg: dict) -> None:
    logging.basicConfig(
        level=getattr(logging, cfg["log_level"].upper()),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        namespace = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc.parser.format_usage(), end="", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help and --version print, then exit 0
        return int(exc.code or 0)
    if not getattr(namespace, "command", None):
        parser.print_help(sys.stderr)
        return 1
    fn, argspecs, _ = COMMANDS[namespace.command]
    try:
        cfg = _effective_config(namespace.command, namespace,
                                GLOBAL_ARGS + argspecs)
        _setup_logging(cfg)
        return fn(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main(argv=sys.argv[1:]))
