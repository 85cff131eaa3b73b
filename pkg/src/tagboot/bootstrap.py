"""Iterative bootstrap loop: grow the gold slice, retrain, re-apply, evaluate.

Every iteration re-applies its freshly learned rule list to the ORIGINAL
projected corpus (state 0), so each persisted state is reproducible from the
state-0 snapshot plus that iteration's rules alone. A synthetic-corpus
generator provides desk-scale data with controllable alignment noise, lexicon
divergence, and shared-tag coverage.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from pathlib import Path

from .align import Alignment
from .corpus import (
    TaggedCorpus,
    Tagset,
    Token,
    Verse,
    VerseId,
    parse_vertical,
    serialize_vertical,
)
from .errors import BootstrapError
from .metrics import MetricsRecord, emit_report, evaluate, parse_metrics_csv
from .tbl import DEFAULT_TEMPLATES, DEFAULT_THETA, RuleList, apply_rules, learn, parse_rules, serialize_rules

SNAPSHOT_PREFIX = "IgbTC-"


@dataclass(frozen=True)
class Schedule:
    """Slice growth plan: fraction of verses added per iteration, and how many."""

    increment: float = 0.05
    iterations: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.increment <= 1.0:
            raise BootstrapError(f"increment must be in (0, 1], got {self.increment}")
        if self.iterations < 0:
            raise BootstrapError(f"iterations must be >= 0, got {self.iterations}")
        if self.increment * self.iterations > 1.0 + 1e-9:
            raise BootstrapError(
                f"increment x iterations must not exceed 1 ({self.increment} x {self.iterations})"
            )

    def slice_size(self, iteration: int, total: int) -> int:
        return min(total, round(iteration * self.increment * total))


@dataclass(frozen=True)
class BootstrapState:
    iteration: int
    gold_ids: frozenset[VerseId]
    snapshot: TaggedCorpus
    rules: RuleList
    record: MetricsRecord


def select_slice(
    gold_ids: frozenset[VerseId],
    iteration: int,
    schedule: Schedule,
    all_ids: list[VerseId],
) -> frozenset[VerseId]:
    """Gold ids for `iteration`: first slice contiguous from the corpus start,
    later slices sampled uniformly (seeded) from the unselected remainder."""
    target = schedule.slice_size(iteration, len(all_ids))
    need = target - len(gold_ids)
    if need <= 0:
        return gold_ids
    if iteration == 1 and not gold_ids:
        return frozenset(all_ids[:target])
    remaining = [vid for vid in all_ids if vid not in gold_ids]
    if need >= len(remaining):
        return gold_ids | set(remaining)
    rng = random.Random(f"{schedule.seed}:{iteration}")
    return gold_ids | set(rng.sample(remaining, need))


def make_training_corpus(
    gold: TaggedCorpus,
    initial: TaggedCorpus,
    gold_ids,
) -> TaggedCorpus:
    """2-column corpus over the selected verses: initial-state tag + gold truth."""
    initial_index = initial.index()
    verses = []
    for gv in gold.verses:
        if gv.id not in gold_ids:
            continue
        iv = initial_index.get(gv.id)
        if iv is None:
            raise BootstrapError(f"verse {gv.id} selected for training but absent from the initial corpus")
        if len(iv.tokens) != len(gv.tokens):
            raise BootstrapError(
                f"verse {gv.id}: token count differs between gold ({len(gv.tokens)}) "
                f"and initial ({len(iv.tokens)}) corpora"
            )
        tokens = tuple(
            Token(gt.form, it.tag, gt.tag) for gt, it in zip(gv.tokens, iv.tokens)
        )
        verses.append(Verse(gv.id, tokens))
    return TaggedCorpus(tuple(verses), columns=2, tagset_name=gold.tagset_name)


def run_iteration(
    state: BootstrapState,
    gold: TaggedCorpus,
    initial0: TaggedCorpus,
    schedule: Schedule,
    templates=DEFAULT_TEMPLATES,
    theta: int = DEFAULT_THETA,
    target_tagset: Tagset | None = None,
    store: "ProjectStore | None" = None,
) -> BootstrapState:
    """One loop step: grow slice, train, re-transform state 0, evaluate, persist."""
    i = state.iteration + 1
    all_ids = [v.id for v in gold.verses]
    gold_ids = select_slice(state.gold_ids, i, schedule, all_ids)
    training = make_training_corpus(gold, initial0, gold_ids)
    rules = learn(training, templates, theta)
    snapshot = apply_rules(rules, initial0)
    record = evaluate(snapshot, gold, target_tagset or Tagset("", ()), f"{SNAPSHOT_PREFIX}{i}")
    new_state = BootstrapState(i, gold_ids, snapshot, rules, record)
    if store is not None:
        store.write_iteration(new_state, all_ids)
    return new_state


def run_bootstrap(
    gold: TaggedCorpus,
    initial0: TaggedCorpus,
    schedule: Schedule,
    templates=DEFAULT_TEMPLATES,
    theta: int = DEFAULT_THETA,
    target_tagset: Tagset | None = None,
    store: "ProjectStore | None" = None,
) -> list[BootstrapState]:
    """Full bootstrap with the simulated annotator (gold tags stand in for corrections)."""
    tagset = target_tagset or Tagset("", ())
    record0 = evaluate(initial0, gold, tagset, f"{SNAPSHOT_PREFIX}0")
    state = BootstrapState(0, frozenset(), initial0, RuleList((), theta), record0)
    states = [state]
    if store is not None:
        store.write_snapshot(0, initial0)
        store.write_metrics([s.record for s in states])
    for _ in range(schedule.iterations):
        state = run_iteration(state, gold, initial0, schedule, templates, theta, tagset, store)
        states.append(state)
        if store is not None:
            store.write_metrics([s.record for s in states])
    if store is not None:
        store.write_series([s.record for s in states])
    return states


# ---------------------------------------------------------------------------
# Synthetic corpus generation


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the deterministic synthetic parallel corpus.

    Target-language tokens each carry a true target tag; the source side maps
    those tags through a fixed many-to-one correspondence (shared tags map to
    themselves). Alignments start as the identity and get perturbed by
    permuting the linked source positions of a noise-rate subset, which keeps
    per-verse tag counts intact.
    """

    verses: int = 2000
    seed: int = 7
    min_verse_len: int = 4
    max_verse_len: int = 10
    types_per_tag: int = 25
    shared_token_fraction: float = 0.08
    lexicon_divergence: float = 0.1
    alignment_noise: float = 0.15
    shared_tags: tuple[str, ...] = ("NNP", "CD")
    target_only_tags: tuple[str, ...] = ("NNC", "NNM", "VrV", "VSI", "PRN", "PREP", "ADV", "CJN")
    source_only_tags: tuple[str, ...] = ("NN", "VB", "PRP", "IN", "RB")

    def __post_init__(self):
        for name in ("shared_token_fraction", "lexicon_divergence", "alignment_noise"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise BootstrapError(f"{name} must be in [0, 1], got {value}")
        if self.verses < 1 or self.min_verse_len < 1 or self.max_verse_len < self.min_verse_len:
            raise BootstrapError("bad synthetic corpus dimensions")

    def tag_map(self) -> dict[str, str]:
        mapping = {tag: tag for tag in self.shared_tags}
        for i, tag in enumerate(self.target_only_tags):
            mapping[tag] = self.source_only_tags[i % len(self.source_only_tags)]
        return mapping


@dataclass(frozen=True)
class SynthResult:
    gold: TaggedCorpus
    source: TaggedCorpus
    alignments: list[Alignment]
    shared_token_count: int
    token_total: int
    target_tagset: Tagset
    source_tagset: Tagset

    @property
    def shared_token_fraction(self) -> float:
        return self.shared_token_count / self.token_total if self.token_total else 0.0


def generate_synthetic(config: SynthConfig = SynthConfig()) -> SynthResult:
    """Deterministic synthetic gold corpus, tagged source rendering, and alignments."""
    rng = random.Random(config.seed)
    tag_map = config.tag_map()
    all_target_tags = list(config.shared_tags) + list(config.target_only_tags)

    target_vocab = {
        tag: [f"{tag.lower()}_{k}" for k in range(config.types_per_tag)]
        for tag in all_target_tags
    }
    lexicon = {
        form: f"x{form}" for forms in target_vocab.values() for form in forms
    }
    source_forms_pool = sorted(lexicon.values())

    gold_verses = []
    source_verses = []
    alignments = []
    shared_count = 0
    total = 0
    for k in range(config.verses):
        vid = VerseId("syn", k // 50 + 1, k % 50 + 1)
        length = rng.randint(config.min_verse_len, config.max_verse_len)
        gold_tokens = []
        source_tokens = []
        for _ in range(length):
            if config.shared_tags and rng.random() < config.shared_token_fraction:
                tag = rng.choice(config.shared_tags)
                shared_count += 1
            else:
                tag = rng.choice(config.target_only_tags)
            total += 1
            form = rng.choice(target_vocab[tag])
            gold_tokens.append(Token(form, tag))
            if rng.random() < config.lexicon_divergence:
                source_form = rng.choice(source_forms_pool)
            else:
                source_form = lexicon[form]
            source_tokens.append(Token(source_form, tag_map[tag]))
        noisy = [i for i in range(length) if rng.random() < config.alignment_noise]
        shuffled = list(noisy)
        rng.shuffle(shuffled)
        link_to = list(range(length))
        for t, s in zip(noisy, shuffled):
            link_to[t] = s
        alignments.append(Alignment(frozenset((t, link_to[t]) for t in range(length))))
        gold_verses.append(Verse(vid, tuple(gold_tokens)))
        source_verses.append(Verse(vid, tuple(source_tokens)))

    target_tagset = Tagset(
        "synthetic-target", tuple((t, "synthetic target tag") for t in all_target_tags)
    )
    source_tagset = Tagset(
        "synthetic-source",
        tuple(
            (t, "synthetic source tag")
            for t in list(config.shared_tags) + list(config.source_only_tags)
        ),
    )
    return SynthResult(
        gold=TaggedCorpus(tuple(gold_verses), columns=1),
        source=TaggedCorpus(tuple(source_verses), columns=1),
        alignments=alignments,
        shared_token_count=shared_count,
        token_total=total,
        target_tagset=target_tagset,
        source_tagset=source_tagset,
    )


# ---------------------------------------------------------------------------
# On-disk project layout


def _atomic_write(path: Path, content: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


class ProjectStore:
    """Persistence for bootstrap artifacts under a project directory.

    Layout: snapshots/IgbTC-<i>.cols, rules/iter-<i>.rules,
    gold-ids/iter-<i>.ids (cumulative, one id per line), metrics.csv, and the
    two plot series files. All writes are atomic (write-temp-then-rename).
    """

    def __init__(self, root):
        self.root = Path(root)

    def snapshot_path(self, iteration: int) -> Path:
        return self.root / "snapshots" / f"{SNAPSHOT_PREFIX}{iteration}.cols"

    def rules_path(self, iteration: int) -> Path:
        return self.root / "rules" / f"iter-{iteration}.rules"

    def gold_ids_path(self, iteration: int) -> Path:
        return self.root / "gold-ids" / f"iter-{iteration}.ids"

    def metrics_path(self) -> Path:
        return self.root / "metrics.csv"

    def write_snapshot(self, iteration: int, corpus: TaggedCorpus):
        path = self.snapshot_path(iteration)
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, serialize_vertical(corpus))

    def read_snapshot(self, iteration: int) -> TaggedCorpus:
        return parse_vertical(self.snapshot_path(iteration).read_text(encoding="utf-8"), 1)

    def write_rules(self, iteration: int, rules: RuleList):
        path = self.rules_path(iteration)
        path.parent.mkdir(parents=True, exist_ok=True)
        _atomic_write(path, serialize_rules(rules))

    def read_rules(self, iteration: int) -> RuleList:
        return parse_rules(self.rules_path(iteration).read_text(encoding="utf-8"))

    def write_gold_ids(self, iteration: int, gold_ids, all_ids: list[VerseId]):
        path = self.gold_ids_path(iteration)
        path.parent.mkdir(parents=True, exist_ok=True)
        ordered = [vid for vid in all_ids if vid in gold_ids]
        _atomic_write(path, "".join(f"{vid}\n" for vid in ordered))

    def read_gold_ids(self, iteration: int) -> list[VerseId]:
        content = self.gold_ids_path(iteration).read_text(encoding="utf-8")
        return [VerseId.parse(line) for line in content.split("\n") if line]

    def write_iteration(self, state: BootstrapState, all_ids: list[VerseId]):
        self.write_snapshot(state.iteration, state.snapshot)
        self.write_rules(state.iteration, state.rules)
        self.write_gold_ids(state.iteration, state.gold_ids, all_ids)

    def write_metrics(self, records: list[MetricsRecord]):
        self.root.mkdir(parents=True, exist_ok=True)
        _atomic_write(self.metrics_path(), emit_report(records).csv)

    def read_metrics(self) -> list[MetricsRecord]:
        return parse_metrics_csv(self.metrics_path().read_text(encoding="utf-8"))

    def write_series(self, records: list[MetricsRecord]):
        report = emit_report(records)
        _atomic_write(self.root / "accuracy-series.tsv", report.accuracy_series)
        _atomic_write(self.root / "transformation-series.tsv", report.transformation_series)

    def snapshot_iterations(self) -> list[int]:
        snap_dir = self.root / "snapshots"
        if not snap_dir.is_dir():
            return []
        out = []
        for name in os.listdir(snap_dir):
            if name.startswith(SNAPSHOT_PREFIX) and name.endswith(".cols"):
                out.append(int(name[len(SNAPSHOT_PREFIX):-len(".cols")]))
        return sorted(out)

    def rule_iterations(self) -> list[int]:
        rules_dir = self.root / "rules"
        if not rules_dir.is_dir():
            return []
        out = []
        for name in os.listdir(rules_dir):
            if name.startswith("iter-") and name.endswith(".rules"):
                out.append(int(name[len("iter-"):-len(".rules")]))
        return sorted(out)
