"""Word alignments: Pharaoh-style file ingestion and a built-in IBM Model 1.

Alignment links are (target position, source position) pairs, the orientation
used throughout the pipeline: ``1-2`` links target token 1 to source token 2.
Files produced by tools that emit the opposite order parse with
``order="source-target"``.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass

from .corpus import Verse
from .errors import AlignmentFormatError

# Synthetic source word standing at position -1 of every source verse; targets
# whose best alignment is the null word stay unlinked.
NULL_FORM = "<NULL>"

_PAIR_RE = re.compile(r"^(\d+)-(\d+)$")
_BARE_INT_RE = re.compile(r"^\d+$")


@dataclass(frozen=True)
class Alignment:
    """Per verse pair, a set of (target, source) position links."""

    links: frozenset[tuple[int, int]]

    def sources_for(self, target_pos: int) -> list[int]:
        return sorted(s for t, s in self.links if t == target_pos)


def parse_alignment_file(content: str, order: str = "target-source") -> list[Alignment]:
    """Parse one line of space-separated ``t-s`` pairs per verse pair.

    A leading bare-integer token is treated as a line id and discarded, so both
    numbered and plain Pharaoh files parse.
    """
    if order not in ("target-source", "source-target"):
        raise ValueError(f"order must be 'target-source' or 'source-target', got {order!r}")
    alignments = []
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if tokens and _BARE_INT_RE.match(tokens[0]):
            tokens = tokens[1:]
        links = set()
        for tok in tokens:
            m = _PAIR_RE.match(tok)
            if not m:
                raise AlignmentFormatError(f"line {lineno}: malformed link token {tok!r}")
            a, b = int(m.group(1)), int(m.group(2))
            links.add((a, b) if order == "target-source" else (b, a))
        alignments.append(Alignment(frozenset(links)))
    return alignments


def serialize_alignments(alignments: list[Alignment]) -> str:
    """One line per alignment, ``t-s`` pairs sorted by (t, s)."""
    out = []
    for a in alignments:
        out.append(" ".join(f"{t}-{s}" for t, s in sorted(a.links)))
    return "".join(line + "\n" for line in out)


def validate_alignment(alignment: Alignment, pair: tuple[Verse, Verse]) -> None:
    """Check every link against the paired verse lengths."""
    source, target = pair
    for t, s in alignment.links:
        if t >= len(target.tokens):
            raise AlignmentFormatError(
                f"verse {target.id}: target position {t} out of range (length {len(target.tokens)})"
            )
        if s >= len(source.tokens):
            raise AlignmentFormatError(
                f"verse {source.id}: source position {s} out of range (length {len(source.tokens)})"
            )


@dataclass(frozen=True)
class TranslationTable:
    """Translation probabilities p(target form | source form), row-normalized."""

    probabilities: dict[tuple[str, str], float]
    log_likelihoods: tuple[float, ...] = ()

    def prob(self, source_form: str, target_form: str) -> float:
        return self.probabilities.get((source_form, target_form), 0.0)


def train_ibm1(pairs: list[tuple[Verse, Verse]], iterations: int) -> TranslationTable:
    """Standard IBM Model 1 EM over source -> target, with a null source word.

    Initialization is uniform over co-occurring forms. The per-iteration corpus
    log-likelihood (computed under the parameters entering the iteration) is
    recorded on the returned table and is non-decreasing.
    """
    if not pairs:
        raise AlignmentFormatError("cannot train aligner on an empty corpus")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    bitext = []
    cooc: dict[str, set[str]] = defaultdict(set)
    for sv, tv in pairs:
        src = [NULL_FORM] + [tok.form for tok in sv.tokens]
        tgt = [tok.form for tok in tv.tokens]
        bitext.append((src, tgt))
        for sf in src:
            cooc[sf].update(tgt)
    if not cooc:
        raise AlignmentFormatError("empty vocabulary")

    t: dict[tuple[str, str], float] = {}
    for sf, targets in cooc.items():
        uniform = 1.0 / len(targets)
        for tf in targets:
            t[(sf, tf)] = uniform

    log_likelihoods = []
    for _ in range(iterations):
        counts: dict[tuple[str, str], float] = defaultdict(float)
        totals: dict[str, float] = defaultdict(float)
        ll = 0.0
        for src, tgt in bitext:
            log_len = math.log(len(src))
            for tf in tgt:
                denom = 0.0
                for sf in src:
                    denom += t[(sf, tf)]
                ll += math.log(denom) - log_len
                for sf in src:
                    c = t[(sf, tf)] / denom
                    counts[(sf, tf)] += c
                    totals[sf] += c
        log_likelihoods.append(ll)
        for key in t:
            t[key] = counts[key] / totals[key[0]]

    return TranslationTable(t, tuple(log_likelihoods))


def align_pair(table: TranslationTable, pair: tuple[Verse, Verse]) -> Alignment:
    """Link each target position to its argmax source position.

    The null word at position -1 competes in the argmax; ties go to the
    smallest position, so a null tie (including all-zero rows for unknown
    target forms) leaves the target unlinked.
    """
    source, target = pair
    probs = table.probabilities
    links = set()
    for tpos, tok in enumerate(target.tokens):
        best_s = -1
        best_p = probs.get((NULL_FORM, tok.form), 0.0)
        for spos, stok in enumerate(source.tokens):
            p = probs.get((stok.form, tok.form), 0.0)
            if p > best_p:
                best_p = p
                best_s = spos
        if best_s >= 0:
            links.add((tpos, best_s))
    return Alignment(frozenset(links))


def align_corpus(table: TranslationTable, pairs: list[tuple[Verse, Verse]]) -> list[Alignment]:
    return [align_pair(table, pair) for pair in pairs]


def one_to_many_stat(alignments: list[Alignment], pairs: list[tuple[Verse, Verse]]) -> tuple[int, int]:
    """(target tokens with >= 2 links, total target tokens) across the corpus."""
    multi = 0
    total = 0
    for alignment, (_, tv) in zip(alignments, pairs):
        total += len(tv.tokens)
        per_target = defaultdict(int)
        for t, _s in alignment.links:
            per_target[t] += 1
        multi += sum(1 for n in per_target.values() if n >= 2)
    return multi, total


def serialize_translation_table(table: TranslationTable) -> str:
    """TSV ``source<TAB>target<TAB>probability`` sorted lexicographically."""
    rows = sorted(table.probabilities.items())
    return "".join(f"{sf}\t{tf}\t{p:.12g}\n" for (sf, tf), p in rows)


def parse_translation_table(content: str) -> TranslationTable:
    probs = {}
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise AlignmentFormatError(f"translation table line {lineno}: expected 3 columns")
        probs[(cols[0], cols[1])] = float(cols[2])
    return TranslationTable(probs)
