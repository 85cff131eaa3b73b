"""Command-line entry point: one subcommand per pipeline stage.

Stages communicate through files in a project directory, so externally
produced artifacts (alignments, source tags) can replace any built-in stage.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import align as align_mod
from . import bootstrap as boot_mod
from . import metrics as metrics_mod
from . import preprocess as prep_mod
from . import projection as proj_mod
from . import tbl as tbl_mod
from .config import ProjectConfig, load_config, save_config
from .corpus import (
    TaggedCorpus,
    parse_parallel,
    parse_tagset,
    parse_vertical,
    serialize_parallel_side,
    serialize_tagset,
    serialize_vertical,
)
from .errors import ParallelGapError, TagbootError
from .service import serve


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="tagboot",
        description="Bootstrap a POS-tagged corpus from a tagged parallel corpus "
        "via cross-lingual projection and transformation-based learning.",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="cap on internal parallelism (output is identical for any value)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("preprocess", help="clean and re-pair the parallel corpus")
    p.add_argument("--project", required=True, help="project directory")

    p = sub.add_parser("align", help="train the built-in aligner or import an alignment file")
    p.add_argument("--project", required=True)
    p.add_argument("--import", dest="import_file", default=None, metavar="FILE",
                   help="ingest an externally produced alignment file instead of training")
    p.add_argument("--order", choices=["target-source", "source-target"], default=None,
                   help="link orientation of the imported file (default: config align_order)")

    p = sub.add_parser("project", help="project source tags through alignments (state 0)")
    p.add_argument("--project", required=True)

    p = sub.add_parser("train", help="learn transformation rules from a 2-column corpus")
    p.add_argument("--project", default=None)
    p.add_argument("--input", required=True, help="2-column training corpus")
    p.add_argument("--rules", required=True, help="output rule file")
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--templates", default=None, help="template file (default: built-in set)")

    p = sub.add_parser("apply", help="apply a rule file to a corpus")
    p.add_argument("--project", default=None)
    p.add_argument("--rules", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--columns", type=int, choices=[1, 2], default=1)
    p.add_argument("--output", required=True)

    p = sub.add_parser("bootstrap", help="run the full iterative loop with the simulated annotator")
    p.add_argument("--project", required=True)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--increment", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--holdout", action="store_true",
                   help="also report metrics over verses never selected for training")

    p = sub.add_parser("eval", help="compare a predicted corpus against a gold corpus")
    p.add_argument("--project", default=None)
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--tagset", default=None, help="target tagset file for the transformation rate")
    p.add_argument("--label", default="eval")
    p.add_argument("--confusion", action="store_true",
                   help="also print per-(gold, predicted) tag counts")

    p = sub.add_parser("synth", help="generate a synthetic project for desk-scale runs")
    p.add_argument("--project", required=True)
    p.add_argument("--verses", type=int, default=2000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.15, help="alignment noise rate")
    p.add_argument("--divergence", type=float, default=0.1, help="lexicon divergence rate")
    p.add_argument("--shared-fraction", type=float, default=0.08,
                   help="fraction of tokens drawn from tags shared by both tagsets")
    p.add_argument("--min-len", type=int, default=4)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--types-per-tag", type=int, default=25)
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--increment", type=float, default=0.05)

    p = sub.add_parser("serve", help="serve the annotation API over a project")
    p.add_argument("--project", required=True)
    p.add_argument("--addr", default="127.0.0.1:8571")
    p.add_argument("--ui", default=None, help="directory of static UI files to serve at /")

    return parser


def _read(path: Path) -> str:
    if not path.is_file():
        raise TagbootError(f"missing file: {path}")
    return path.read_text(encoding="utf-8")


def _load_clean_pairs(root: Path, cfg: ProjectConfig):
    source = _read(root / "work" / "source.clean.txt")
    target = _read(root / "work" / "target.clean.txt")
    return parse_parallel(source, target)


def _load_templates(path_text: str | None, root: Path | None, cfg: ProjectConfig | None):
    if path_text:
        return tbl_mod.parse_templates(_read(Path(path_text)))
    if cfg and cfg.templates and root is not None:
        return tbl_mod.parse_templates(_read(cfg.path(root, "templates")))
    return tbl_mod.DEFAULT_TEMPLATES


def cmd_preprocess(args) -> int:
    root = Path(args.project)
    cfg = load_config(root)
    substitutions = None
    if cfg.substitutions:
        substitutions = prep_mod.parse_substitutions(_read(cfg.path(root, "substitutions")))
    try:
        pairs = parse_parallel(
            _read(cfg.path(root, "source_text")), _read(cfg.path(root, "target_text"))
        )
        gap_report = prep_mod.ParallelReport()
    except ParallelGapError as gap:
        pairs = gap.pairs
        gap_report = prep_mod.verify_parallel(gap)
    out_pairs, report = prep_mod.preprocess_corpus(pairs, cfg.max_verse_len, substitutions)
    merged = prep_mod.ParallelReport(
        missing_in_source=tuple(sorted(gap_report.missing_in_source + report.missing_in_source)),
        missing_in_target=tuple(sorted(gap_report.missing_in_target + report.missing_in_target)),
        split_verses=report.split_verses,
        removed_symbols=report.removed_symbols,
    )
    work = root / "work"
    work.mkdir(parents=True, exist_ok=True)
    (work / "source.clean.txt").write_text(
        serialize_parallel_side([sv for sv, _ in out_pairs]), encoding="utf-8"
    )
    (work / "target.clean.txt").write_text(
        serialize_parallel_side([tv for _, tv in out_pairs]), encoding="utf-8"
    )
    (work / "preprocess-report.txt").write_text(merged.format_text(), encoding="utf-8")
    print(f"preprocess: {len(out_pairs)} verse pairs kept")
    dropped = len(merged.missing_in_source) + len(merged.missing_in_target)
    if dropped:
        print(f"preprocess: {dropped} unmatched verse ids reported in work/preprocess-report.txt")
    return 0


def cmd_align(args) -> int:
    root = Path(args.project)
    cfg = load_config(root)
    pairs = _load_clean_pairs(root, cfg)
    work = root / "work"
    work.mkdir(parents=True, exist_ok=True)
    if args.import_file:
        order = args.order or cfg.align_order
        alignments = align_mod.parse_alignment_file(_read(Path(args.import_file)), order)
        if len(alignments) != len(pairs):
            raise TagbootError(
                f"{args.import_file}: {len(alignments)} alignment lines for {len(pairs)} verse pairs"
            )
        for alignment, pair in zip(alignments, pairs):
            align_mod.validate_alignment(alignment, pair)
    else:
        table = align_mod.train_ibm1(pairs, cfg.align_iterations)
        (work / "ttable.tsv").write_text(
            align_mod.serialize_translation_table(table), encoding="utf-8"
        )
        alignments = align_mod.align_corpus(table, pairs)
    (work / "alignments.txt").write_text(
        align_mod.serialize_alignments(alignments), encoding="utf-8"
    )
    multi, total = align_mod.one_to_many_stat(alignments, pairs)
    fraction = multi / total if total else 0.0
    print(f"align: {len(alignments)} verse pairs aligned")
    print(f"align: one-to-many targets {multi} of {total} ({fraction:.4%})")
    return 0


def cmd_project(args) -> int:
    root = Path(args.project)
    cfg = load_config(root)
    pairs = _load_clean_pairs(root, cfg)
    source_tags_corpus = parse_vertical(_read(cfg.path(root, "source_tags")), 1)
    tags_by_id = {v.id: [t.tag for t in v.tokens] for v in source_tags_corpus.verses}
    columns = []
    for sv, _ in pairs:
        if sv.id not in tags_by_id:
            raise TagbootError(f"source tags missing for verse {sv.id}")
        columns.append(tags_by_id[sv.id])
    alignments_path = cfg.path(root, "alignments")
    if alignments_path == root / "work" / "alignments.txt":
        order = "target-source"  # the align stage writes canonical orientation
    else:
        order = cfg.align_order
    alignments = align_mod.parse_alignment_file(_read(alignments_path), order)
    if len(alignments) != len(pairs):
        raise TagbootError(
            f"{alignments_path}: {len(alignments)} alignment lines for {len(pairs)} verse pairs"
        )
    corpus, stat = proj_mod.project_corpus(pairs, alignments, columns)
    store = boot_mod.ProjectStore(root)
    store.write_snapshot(0, corpus)
    stats_text = (
        f"one_to_many_count={stat.multi_count}\n"
        f"token_total={stat.token_total}\n"
        f"fraction={stat.fraction!r}\n"
    )
    (root / "work").mkdir(parents=True, exist_ok=True)
    (root / "work" / "projection-stats.txt").write_text(stats_text, encoding="utf-8")
    print(f"project: wrote {store.snapshot_path(0)}")
    print(
        f"project: one-to-many candidates {stat.multi_count} of {stat.token_total} "
        f"({stat.fraction:.4%})"
    )
    return 0


def cmd_train(args) -> int:
    cfg = None
    root = None
    if args.project:
        root = Path(args.project)
        cfg = load_config(root)
    corpus = parse_vertical(_read(Path(args.input)), 2)
    templates = _load_templates(args.templates, root, cfg)
    theta = args.theta if args.theta is not None else (cfg.theta if cfg else tbl_mod.DEFAULT_THETA)
    rules = tbl_mod.learn(corpus, templates, theta)
    Path(args.rules).write_text(tbl_mod.serialize_rules(rules), encoding="utf-8")
    print(f"train: learned {len(rules)} rules (theta={theta}) -> {args.rules}")
    return 0


def cmd_apply(args) -> int:
    rules = tbl_mod.parse_rules(_read(Path(args.rules)))
    corpus = parse_vertical(_read(Path(args.input)), args.columns)
    result = tbl_mod.apply_rules(rules, corpus)
    Path(args.output).write_text(serialize_vertical(result), encoding="utf-8")
    print(f"apply: {len(rules)} rules over {corpus.token_count()} tokens -> {args.output}")
    return 0


def _holdout_records(states, gold, tagset):
    selected = states[-1].gold_ids
    holdout_ids = [v.id for v in gold.verses if v.id not in selected]
    if not holdout_ids:
        return []
    keep = set(holdout_ids)
    records = []
    gold_sub = TaggedCorpus(tuple(v for v in gold.verses if v.id in keep), 1)
    for state in states:
        pred_sub = TaggedCorpus(
            tuple(v for v in state.snapshot.verses if v.id in keep), 1
        )
        records.append(
            metrics_mod.evaluate(pred_sub, gold_sub, tagset, state.record.label)
        )
    return records


def cmd_bootstrap(args) -> int:
    root = Path(args.project)
    cfg = load_config(root)
    if not cfg.gold:
        raise TagbootError("bootstrap requires a gold corpus; set gold= in project.cfg")
    gold = parse_vertical(_read(cfg.path(root, "gold")), 1)
    store = boot_mod.ProjectStore(root)
    if 0 not in store.snapshot_iterations():
        raise TagbootError(f"missing file: {store.snapshot_path(0)} (run the project stage first)")
    initial0 = store.read_snapshot(0)
    tagset_path = cfg.path(root, "target_tagset")
    tagset = parse_tagset(_read(tagset_path), tagset_path.stem)
    schedule = boot_mod.Schedule(
        args.increment if args.increment is not None else cfg.increment,
        args.iterations if args.iterations is not None else cfg.iterations,
        args.seed if args.seed is not None else cfg.seed,
    )
    theta = args.theta if args.theta is not None else cfg.theta
    templates = _load_templates(None, root, cfg)
    states = boot_mod.run_bootstrap(gold, initial0, schedule, templates, theta, tagset, store)
    report = metrics_mod.emit_report([s.record for s in states])
    print(report.table, end="")
    if args.holdout:
        holdout = _holdout_records(states, gold, tagset)
        if holdout:
            print("holdout (never-selected verses):")
            print(metrics_mod.emit_report(holdout).table, end="")
        else:
            print("holdout: no never-selected verses")
    return 0


def cmd_eval(args) -> int:
    pred = parse_vertical(_read(Path(args.pred)), 1)
    gold = parse_vertical(_read(Path(args.gold)), 1)
    tagset_path = None
    if args.tagset:
        tagset_path = Path(args.tagset)
    elif args.project:
        cfg = load_config(Path(args.project))
        tagset_path = cfg.path(Path(args.project), "target_tagset")
    if tagset_path is None:
        raise TagbootError("eval requires --tagset (or --project with target_tagset configured)")
    tagset = parse_tagset(_read(tagset_path), tagset_path.stem)
    record = metrics_mod.evaluate(pred, gold, tagset, args.label)
    print(metrics_mod.emit_report([record]).table, end="")
    if args.confusion:
        print(metrics_mod.confusion_table(pred, gold), end="")
    return 0


def cmd_synth(args) -> int:
    root = Path(args.project)
    config = boot_mod.SynthConfig(
        verses=args.verses,
        seed=args.seed,
        min_verse_len=args.min_len,
        max_verse_len=args.max_len,
        types_per_tag=args.types_per_tag,
        shared_token_fraction=args.shared_fraction,
        lexicon_divergence=args.divergence,
        alignment_noise=args.noise,
    )
    result = boot_mod.generate_synthetic(config)
    root.mkdir(parents=True, exist_ok=True)
    pairs = list(zip(result.source.verses, result.gold.verses))
    (root / "source.txt").write_text(
        serialize_parallel_side([sv for sv, _ in pairs]), encoding="utf-8"
    )
    (root / "target.txt").write_text(
        serialize_parallel_side([tv for _, tv in pairs]), encoding="utf-8"
    )
    (root / "source-tags.cols").write_text(serialize_vertical(result.source), encoding="utf-8")
    (root / "gold.cols").write_text(serialize_vertical(result.gold), encoding="utf-8")
    (root / "alignments.txt").write_text(
        align_mod.serialize_alignments(result.alignments), encoding="utf-8"
    )
    (root / "source.tagset").write_text(serialize_tagset(result.source_tagset), encoding="utf-8")
    (root / "target.tagset").write_text(serialize_tagset(result.target_tagset), encoding="utf-8")
    cfg = ProjectConfig(
        source_tagset="source.tagset",
        alignments="alignments.txt",
        gold="gold.cols",
        increment=args.increment,
        iterations=args.iterations,
        seed=args.seed,
        theta=args.theta,
    )
    save_config(cfg, root)
    print(f"synth: {config.verses} verses, {result.token_total} tokens -> {root}")
    print(f"synth: shared-tag token fraction {result.shared_token_fraction!r}")
    return 0


def cmd_serve(args) -> int:
    server = serve(args.project, args.addr, args.ui)
    host, port = server.server_address[:2]
    print(f"serve: listening on http://{host}:{port}/ (project {args.project})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


_COMMANDS = {
    "preprocess": cmd_preprocess,
    "align": cmd_align,
    "project": cmd_project,
    "train": cmd_train,
    "apply": cmd_apply,
    "bootstrap": cmd_bootstrap,
    "eval": cmd_eval,
    "synth": cmd_synth,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 0:
        parser.error("--threads must be >= 0")
    try:
        return _COMMANDS[args.command](args)
    except (TagbootError, FileNotFoundError) as exc:
        print(f"tagboot {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
