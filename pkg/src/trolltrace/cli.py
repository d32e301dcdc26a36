"""Command-line pipeline: ingest, featurize, compare, train, evaluate, detect.

Every subcommand writes its outputs plus a ``*.manifest.json`` recording the
resolved configuration, input and output hashes and library versions. No
timestamps go into outputs, so rerunning a manifest reproduces the same bytes.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Corpus, DataError, load_any, merge_corpora, parse_campaign_csv, write_corpus
from .evaluation import ProtocolError, detect_in_wild, false_positive_eval, leave_one_campaign_eval
from .features import (
    FEATURE_GROUPS,
    Dataset,
    LanguageTable,
    auto_reference_time,
    balance_sample,
    build_dataset,
)
from .learners import (
    ModelError,
    ablate_components,
    cross_validate,
    gini_importance,
    load_model,
    save_model,
    train,
)
from .learners.models import ALIASES, ALGORITHMS
from .sources import SourceCatalog
from .stats import (
    app_usage_timeseries,
    campaign_metrics,
    comparison_report,
    cross_corpus_duplicates,
    format_comparison,
    source_count_cdf,
    split_by_label,
    tfidf_group_scores,
)
from .stylometry import wordlist_hash
from .synth import SynthConfig, campaign_names, synth_campaigns

COMMANDS = (
    "ingest", "featurize", "ks-report", "campaign-metrics", "timeseries", "duplicates", "cdf",
    "tfidf", "train", "ablate", "importance", "cross-eval", "fp-eval", "detect", "synth",
)
# never recorded in manifests: they cannot change any output byte
_NON_SEMANTIC = {"workers", "config", "handler", "usage"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --- small IO helpers --------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _num(x) -> str:
    return repr(float(x))


def _summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary.txt")


def write_manifest(args, inputs, outputs, extra=None) -> Path:
    """Record everything needed to reproduce ``outputs`` beside the first one."""
    outputs = [Path(p) for p in outputs]
    first = outputs[0]
    target = first / "manifest.json" if first.is_dir() else first.with_name(first.name + ".manifest.json")
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _NON_SEMANTIC}
    files = []
    for p in outputs:
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.is_file() and q != target))
        else:
            files.append(p)
    doc = {
        "command": args.command,
        "config": config,
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "outputs": [{"path": str(p), "sha256": sha256_file(p)} for p in files],
        "versions": {
            "trolltrace": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wordlists_sha256": wordlist_hash(),
    }
    doc.update(extra or {})
    _write_text(target, json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return target


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, [], "")]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{args.usage}trolltrace {args.command}: error: missing required option(s) {flags}")


def _catalog(args) -> SourceCatalog:
    return SourceCatalog.load(args.catalog)


def _table(args, model=None) -> LanguageTable:
    if args.language_table:
        return LanguageTable.load(args.language_table)
    if model is not None and model.language_codes:
        return LanguageTable(tuple(model.language_codes))
    return LanguageTable.default()


def _ref_time(args, corpora) -> int:
    if args.ref_time in (None, "auto"):
        return auto_reference_time(corpora)
    try:
        return int(args.ref_time)
    except ValueError:
        raise UsageError(f"--ref-time must be 'auto' or an integer epoch, not {args.ref_time!r}") from None


def _corpora(paths, label=None) -> list[Corpus]:
    return [load_any(p, None, label) for p in paths]


# --- subcommands -------------------------------------------------------------


def cmd_ingest(args):
    _need(args, "input", "out")
    fmt = None if args.format == "auto" else args.format
    label = args.label
    parts = []
    for p in args.input:
        use = fmt or ("csv" if str(p).endswith(".csv") else "accounts")
        if use == "csv":
            parts.append(parse_campaign_csv(p, label=label or "troll", campaign=args.campaign or ""))
        else:
            parts.append(load_any(p, use, label))
    corpus = merge_corpora(*parts) if len(parts) > 1 else parts[0]
    write_corpus(corpus, args.out)
    skipped = sum(c.skipped for c in parts)
    print(f"{len(corpus)} accounts, {sum(len(a.tweets) for a in corpus)} tweets, {skipped} rows skipped")
    return args.input, [args.out]


def cmd_featurize(args):
    _need(args, "input", "out")
    corpora = _corpora(args.input)
    ref = _ref_time(args, corpora)
    catalog, table = _catalog(args), _table(args)
    if args.balance:
        trolls = [c for c in corpora if c.label == "troll"]
        benign = [c for c in corpora if c.label == "benign"]
        if not trolls or not benign:
            raise DataError("--balance needs at least one troll and one benign corpus")
        pos = trolls[0] if len(trolls) == 1 else merge_corpora(*trolls)
        neg = benign[0] if len(benign) == 1 else merge_corpora(*benign)
        ds = balance_sample(pos, neg, args.balance, args.seed, ref, catalog, table)
    else:
        ds = build_dataset(corpora, ref, catalog, table, workers=args.workers)
    ds.to_csv(args.out)
    side = Path(args.out).with_name(Path(args.out).stem + ".provenance.csv")
    print(f"{len(ds)} accounts x {ds.X.shape[1]} features, reference time {ref}")
    return args.input, [args.out, side], {"reference_time": ref, "catalog_sha256": catalog.content_hash(),
                                          "language_codes": list(table.codes)}


def cmd_ks_report(args):
    _need(args, "input", "out")
    ds = Dataset.from_csv(args.input)
    trolls, real = split_by_label(ds)
    rows = comparison_report(trolls, real, alpha=args.alpha)
    _write_csv(
        args.out,
        ["feature", "mean_troll", "mean_real", "ks_statistic", "p_value", "significant"],
        [[r.feature_name, _num(r.mean_troll), _num(r.mean_real), _num(r.ks.statistic), _num(r.ks.p_value),
          int(r.ks.significant)] for r in rows],
    )
    text = format_comparison(rows)
    _write_text(_summary_path(Path(args.out)), text)
    print(text, end="")
    return [args.input], [args.out, _summary_path(Path(args.out))]


def cmd_campaign_metrics(args):
    _need(args, "input", "out")
    catalog = _catalog(args)
    rows = []
    for c in _corpora(args.input):
        m = campaign_metrics(c, catalog)
        rows.append([m.campaign, m.account_count, _num(m.scheduled_fraction), _num(m.retweet_fraction)])
    rows.sort(key=lambda r: r[0])
    _write_csv(args.out, ["campaign", "accounts", "scheduled_fraction", "retweet_fraction"], rows)
    return args.input, [args.out]


def cmd_timeseries(args):
    _need(args, "input", "out", "app")
    series = app_usage_timeseries(_corpora(args.input), args.app, args.bin_seconds)
    rows = [[name, start, n] for name in sorted(series) for start, n in series[name]]
    _write_csv(args.out, ["corpus", "bin_start", "count"], rows)
    return args.input, [args.out]


def cmd_duplicates(args):
    _need(args, "input", "out")
    hits = cross_corpus_duplicates(_corpora(args.input), args.min_corpora)
    _write_csv(
        args.out,
        ["text", "corpora", "spread", "count"],
        [[h.text, ";".join(sorted(h.corpora)), len(h.corpora), h.count] for h in hits],
    )
    print(f"{len(hits)} texts shared by at least {args.min_corpora} corpora")
    return args.input, [args.out]


def cmd_cdf(args):
    _need(args, "input", "out")
    rows = []
    for c in sorted(_corpora(args.input), key=lambda c: c.name):
        rows.extend([c.name, x, _num(f)] for x, f in source_count_cdf(c.accounts))
    _write_csv(args.out, ["corpus", "distinct_sources", "cdf"], rows)
    return args.input, [args.out]


def cmd_tfidf(args):
    _need(args, "group_a", "group_b", "out")
    a = [acc for c in _corpora(args.group_a) for acc in c.accounts]
    b = [acc for c in _corpora(args.group_b) for acc in c.accounts]
    if not a or not b:
        raise DataError("both groups must contain accounts")
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    sa, sb = tfidf_group_scores(a, b, args.doc_unit)
    top_a = sorted(sa.items(), key=lambda kv: (-kv[1], kv[0]))[: args.k]
    top_b = sorted(sb.items(), key=lambda kv: (-kv[1], kv[0]))[: args.k]
    rows = [["a", i + 1, t, _num(s)] for i, (t, s) in enumerate(top_a)]
    rows += [["b", i + 1, t, _num(s)] for i, (t, s) in enumerate(top_b)]
    _write_csv(args.out, ["group", "rank", "term", "score"], rows)
    return list(args.group_a) + list(args.group_b), [args.out]


def _hyperparams(pairs) -> dict:
    hp = {}
    for item in pairs or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            hp[key] = json.loads(raw)
        except json.JSONDecodeError:
            hp[key] = raw
    return hp


def _metric_row(name, m):
    return [name, _num(m.accuracy), _num(m.precision), _num(m.recall), _num(m.f1), m.tp, m.fp, m.fn, m.tn]


_METRIC_HEADER = ["fold", "accuracy", "precision", "recall", "f1", "tp", "fp", "fn", "tn"]


def cmd_train(args):
    _need(args, "input", "out")
    ds = Dataset.from_csv(args.input)
    hp = _hyperparams(args.param)
    catalog, table = _catalog(args), _table(args)
    model = train(args.algo, ds, hp, args.seed, table.codes, catalog.content_hash())
    save_model(model, args.out)
    outputs = [args.out]
    if args.folds:
        report = cross_validate(args.algo, ds, args.folds, args.seed, hp, args.threshold)
        out = Path(args.out)
        ev = out.with_name(out.stem + ".cv.csv")
        rows = [_metric_row(i + 1, m) for i, m in enumerate(report.folds)]
        rows.append(_metric_row("all", report.aggregate))
        _write_csv(ev, _METRIC_HEADER, rows)
        a = report.aggregate
        text = (f"{report.algorithm}, {args.folds}-fold: accuracy {a.accuracy:.4f} precision {a.precision:.4f} "
                f"recall {a.recall:.4f} F1 {a.f1:.4f}\n")
        _write_text(_summary_path(ev), text)
        print(text, end="")
        outputs += [ev, _summary_path(ev)]
    return [args.input], outputs


def cmd_ablate(args):
    _need(args, "input", "out")
    ds = Dataset.from_csv(args.input)
    reports = ablate_components(ds, args.algo, args.folds, args.seed, FEATURE_GROUPS, _hyperparams(args.param))
    rows = [_metric_row(name, r.aggregate) for name, r in reports.items()]
    _write_csv(args.out, ["group", *_METRIC_HEADER[1:]], rows)
    text = "".join(f"{name:<12}F1 {r.aggregate.f1:.4f}  accuracy {r.aggregate.accuracy:.4f}\n"
                   for name, r in reports.items())
    _write_text(_summary_path(Path(args.out)), text)
    print(text, end="")
    return [args.input], [args.out, _summary_path(Path(args.out))]


def cmd_importance(args):
    _need(args, "model", "out")
    model = load_model(args.model)
    imp = gini_importance(model)
    order = sorted(range(len(imp)), key=lambda i: (-imp[i], i))
    _write_csv(args.out, ["rank", "feature", "importance"],
               [[r + 1, model.feature_names[i], _num(imp[i])] for r, i in enumerate(order)])
    return [args.model], [args.out]


def cmd_cross_eval(args):
    _need(args, "campaigns", "benign", "out")
    campaigns = _corpora(args.campaigns, "troll")
    benign = load_any(args.benign, None, "benign")
    ref = _ref_time(args, campaigns + [benign])
    reports = leave_one_campaign_eval(
        campaigns, benign, args.algo, args.n_per_class, args.seed, args.threshold,
        _hyperparams(args.param), ref, _catalog(args), _table(args), args.workers,
    )
    rows, lines = [], []
    for r in reports:
        for t in r.targets:
            rows.append([r.training_campaign, t.campaign, t.detected, t.total, _num(t.rate)])
        rows.append([r.training_campaign, "ALL", r.detected, r.total, _num(r.detection_rate)])
        lines.append(f"{r.training_campaign}: detected {r.detected}/{r.total} ({r.detection_rate:.2%})")
    _write_csv(args.out, ["training_campaign", "target_campaign", "detected", "total", "rate"], rows)
    text = "\n".join(lines) + "\n"
    _write_text(_summary_path(Path(args.out)), text)
    print(text, end="")
    return list(args.campaigns) + [args.benign], [args.out, _summary_path(Path(args.out))], {"reference_time": ref}


def cmd_fp_eval(args):
    _need(args, "model", "input", "out")
    model = load_model(args.model)
    holdout = load_any(args.input, None, "benign")
    ref = _ref_time(args, [holdout])
    rate = false_positive_eval(model, holdout, ref, _catalog(args), _table(args, model), args.threshold)
    flagged = round(rate * len(holdout))
    _write_csv(args.out, ["holdout", "accounts", "flagged", "rate"], [[holdout.name, len(holdout), flagged, _num(rate)]])
    print(f"{flagged}/{len(holdout)} benign accounts flagged ({rate:.2%})")
    return [args.model, args.input], [args.out], {"reference_time": ref}


def cmd_detect(args):
    _need(args, "model", "input", "out")
    model = load_model(args.model)
    corpus = load_any(args.input, None, None)
    if corpus.label == "troll":
        corpus = corpus.relabel("unlabeled")
    catalog = _catalog(args)
    ref = _ref_time(args, [corpus])
    prefilter = "fake_source_users" if args.prefilter == "fake" else "all"
    rep = detect_in_wild(model, corpus, catalog, prefilter, ref, _table(args, model), args.threshold)
    flagged = set(rep.flagged)
    rows = [[aid, _num(s), int(aid in flagged)] for aid, s in sorted(rep.scores.items())]
    _write_csv(args.out, ["account_id", "score", "flagged"], rows)
    text = f"{rep.candidate_count} candidates, {len(rep.flagged)} flagged ({rep.flag_rate:.2%})\n"
    _write_text(_summary_path(Path(args.out)), text)
    print(text, end="")
    return [args.model, args.input], [args.out, _summary_path(Path(args.out))], {"reference_time": ref}


def cmd_synth(args):
    _need(args, "out")
    knobs = dict(args.synth_knobs or {})
    for key in ("n_troll", "n_benign", "n_campaigns"):
        if getattr(args, key) is not None:
            knobs[key] = getattr(args, key)
    knobs["seed"] = args.seed
    try:
        cfg = SynthConfig.from_dict(knobs)
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid synth config: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    camps, benign = synth_campaigns(cfg)
    for c in camps:
        write_corpus(c, out / f"{c.name}.jsonl")
    write_corpus(benign, out / f"{benign.name}.jsonl")
    if args.holdout:
        hcfg = SynthConfig.from_dict({**cfg.to_dict(), "n_benign": args.holdout, "benign_name": "holdout",
                                      "seed": cfg.seed + 1})
        _, hold = synth_campaigns(hcfg)
        write_corpus(hold, out / "holdout.jsonl")
    print(f"wrote {', '.join(campaign_names(cfg))}, {benign.name}" + (", holdout" if args.holdout else ""))
    inputs = [args.config] if args.config else []
    return inputs, [out], {"synth_config": cfg.to_dict()}


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker processes; never changes results (default: all cores)")
    common.add_argument("--config", help="JSON file supplying defaults; flags override it")
    common.add_argument("--catalog", help="client catalog JSON (default: shipped catalog)")
    common.add_argument("--language-table", help="language table JSON (default: shipped table)")
    common.add_argument("--threshold", type=float, default=0.5, help="troll score cut (default 0.5)")
    common.add_argument("--out", help="output file (directory for synth)")

    parser = _Parser(prog="trolltrace", description="Troll account detection pipeline.")
    parser.add_argument("--version", action="version", version=f"trolltrace {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    algos = sorted(set(ALGORITHMS) | set(ALIASES))

    def add(name, handler, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(handler=handler, usage=p.format_usage())
        return p

    p = add("ingest", cmd_ingest, "parse raw dumps into canonical account JSONL")
    p.add_argument("--input", nargs="+")
    p.add_argument("--format", choices=["auto", "csv", "jsonl", "accounts"], default="auto")
    p.add_argument("--label", choices=["troll", "benign", "unlabeled"])
    p.add_argument("--campaign", help="campaign name for CSV dumps (default: from file name)")

    p = add("featurize", cmd_featurize, "build the 45-feature dataset CSV")
    p.add_argument("--input", nargs="+")
    p.add_argument("--ref-time", default="auto", help="'auto' or epoch seconds")
    p.add_argument("--balance", type=int, default=0, help="sample this many accounts per class")

    p = add("ks-report", cmd_ks_report, "troll vs real feature comparison with KS tests")
    p.add_argument("--input")
    p.add_argument("--alpha", type=float, default=0.01)

    p = add("campaign-metrics", cmd_campaign_metrics, "scheduled-app and retweet share per campaign")
    p.add_argument("--input", nargs="+")

    p = add("timeseries", cmd_timeseries, "binned tweet counts for one client app")
    p.add_argument("--input", nargs="+")
    p.add_argument("--app")
    p.add_argument("--bin-seconds", type=int, default=86400)

    p = add("duplicates", cmd_duplicates, "texts shared across corpora")
    p.add_argument("--input", nargs="+")
    p.add_argument("--min-corpora", type=int, default=2)

    p = add("cdf", cmd_cdf, "CDF of distinct clients per account")
    p.add_argument("--input", nargs="+")

    p = add("tfidf", cmd_tfidf, "top TF-IDF terms of two account groups")
    p.add_argument("--group-a", nargs="+")
    p.add_argument("--group-b", nargs="+")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--doc-unit", choices=["account", "tweet"], default="account")

    p = add("train", cmd_train, "fit a classifier and optionally cross-validate it")
    p.add_argument("--input")
    p.add_argument("--algo", choices=algos, default="rf")
    p.add_argument("--folds", type=int, default=10, help="0 skips cross-validation")
    p.add_argument("--param", nargs="*", help="hyperparameters as key=value")

    p = add("ablate", cmd_ablate, "cross-validate each feature group alone")
    p.add_argument("--input")
    p.add_argument("--algo", choices=algos, default="rf")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--param", nargs="*")

    p = add("importance", cmd_importance, "Gini importance of a forest model")
    p.add_argument("--model")

    p = add("cross-eval", cmd_cross_eval, "train on each campaign, detect the others")
    p.add_argument("--campaigns", nargs="+")
    p.add_argument("--benign")
    p.add_argument("--algo", choices=algos, default="rf")
    p.add_argument("--n-per-class", type=int, default=500)
    p.add_argument("--ref-time", default="auto")
    p.add_argument("--param", nargs="*")

    p = add("fp-eval", cmd_fp_eval, "false-positive rate on a benign holdout")
    p.add_argument("--model")
    p.add_argument("--input")
    p.add_argument("--ref-time", default="auto")

    p = add("detect", cmd_detect, "flag accounts in an unlabeled corpus")
    p.add_argument("--model")
    p.add_argument("--input")
    p.add_argument("--prefilter", choices=["fake", "none"], default="fake")
    p.add_argument("--ref-time", default="auto")

    p = add("synth", cmd_synth, "generate synthetic troll and benign corpora")
    p.add_argument("--n-troll", type=int)
    p.add_argument("--n-benign", type=int)
    p.add_argument("--n-campaigns", type=int)
    p.add_argument("--holdout", type=int, default=0, help="also write a disjoint benign holdout of this size")
    return parser


def _config_defaults(parser, argv) -> None:
    """Apply a JSON config file as subcommand defaults. Keys may be flat or
    nested under the subcommand name. Unknown keys are synth knobs for
    ``synth`` and a usage error elsewhere."""
    pre = _Parser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or known.command not in COMMANDS:
        return
    try:
        doc = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError(f"config {known.config} must be a JSON object")
    flat = {k: v for k, v in doc.items() if k not in COMMANDS}
    flat.update(doc.get(known.command, {}))
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[known.command]
    dests = {a.dest for a in sub._actions}
    settable = {k.replace("-", "_"): v for k, v in flat.items() if k.replace("-", "_") in dests}
    rest = {k: v for k, v in flat.items() if k.replace("-", "_") not in dests}
    if known.command == "synth":
        settable["synth_knobs"] = rest
    elif rest:
        raise UsageError(f"unknown config keys for {known.command}: {', '.join(sorted(rest))}")
    sub.set_defaults(**settable)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _config_defaults(parser, argv)
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_help())
        if not hasattr(args, "synth_knobs") and args.command == "synth":
            args.synth_knobs = {}
        result = args.handler(args)
        inputs, outputs, *extra = result
        write_manifest(args, inputs, outputs, extra[0] if extra else None)
        return 0
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (DataError, ModelError, ProtocolError, OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"trolltrace: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
