"""Cleaning and structural reconciliation of a parallel corpus before alignment.

Token normalization strips syllable-break apostrophes and middle dots inside
alphabetic words, composes stray combining marks onto their base characters,
and removes Hebrew-block characters. Over-long verses are split at major
punctuation and fragments re-paired across the two sides by suffix.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus import Token, Verse, VerseId
from .errors import ParallelGapError, PreprocessError

MAJOR_PUNCTUATION = {".", ";", ":", "?", "!"}

_APOSTROPHES = {"'", "’"}
_MIDDLE_DOTS = {"·", "‧"}
# Marks that OCR/typesetting often leave detached: combining grave, combining
# acute, combining dot below.
_COMBINING_MARKS = {"̀", "́", "̣"}

_SUFFIXES = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class ParallelReport:
    """What preprocessing removed, split, or failed to re-pair."""

    missing_in_source: tuple[VerseId, ...] = ()
    missing_in_target: tuple[VerseId, ...] = ()
    split_verses: tuple[tuple[VerseId, int], ...] = ()
    removed_symbols: tuple[tuple[str, int], ...] = ()

    def is_empty(self) -> bool:
        return not (self.missing_in_source or self.missing_in_target or self.split_verses or self.removed_symbols)

    def format_text(self) -> str:
        lines = []
        for vid in self.missing_in_source:
            lines.append(f"missing-in-source\t{vid}")
        for vid in self.missing_in_target:
            lines.append(f"missing-in-target\t{vid}")
        for vid, n in self.split_verses:
            lines.append(f"split\t{vid}\t{n}")
        for ch, n in self.removed_symbols:
            lines.append(f"removed\tU+{ord(ch):04X}\t{n}")
        return "".join(line + "\n" for line in lines)


def _is_hebrew(ch: str) -> bool:
    return "֐" <= ch <= "׿"


def normalize_token(form: str, removed: Counter | None = None) -> str | None:
    """Normalize one token form; returns None when nothing is left of it.

    Runs to a fixpoint: composing a stray mark can turn a neighbor alphabetic,
    which in turn exposes an apostrophe or middle dot for removal. Every
    non-identity pass strictly shortens the token, so this terminates.
    `removed` optionally accumulates per-character removal counts.
    """
    current = form
    while True:
        result = _normalize_once(current, removed)
        if result is None or result == current:
            return result
        current = result


def _normalize_once(form: str, removed: Counter | None) -> str | None:
    kept = []
    for i, ch in enumerate(form):
        if _is_hebrew(ch):
            if removed is not None:
                removed[ch] += 1
            continue
        if ch in _APOSTROPHES or ch in _MIDDLE_DOTS:
            prev_alpha = i > 0 and form[i - 1].isalpha()
            next_alpha = i + 1 < len(form) and form[i + 1].isalpha()
            if prev_alpha and next_alpha:
                if removed is not None:
                    removed[ch] += 1
                continue
        kept.append(ch)

    out: list[str] = []
    for ch in kept:
        if ch in _COMBINING_MARKS and out:
            composed = unicodedata.normalize("NFC", out[-1] + ch)
            if len(composed) == 1:
                out[-1] = composed
                continue
        out.append(ch)
    result = "".join(out)
    return result if result else None


def split_long_verse(verse: Verse, max_len: int = 100) -> list[Verse]:
    """Split a verse longer than max_len at major punctuation, suffixing fragments.

    The split point is the last major-punctuation token whose index keeps the
    fragment within max_len; without one the fragment is cut hard at max_len.
    Fragment token lists concatenate back to the original token list.
    """
    if max_len < 1:
        raise ValueError("max_len must be positive")
    if len(verse.tokens) <= max_len:
        return [verse]
    if verse.id.suffix:
        raise PreprocessError(f"verse {verse.id} already carries a split suffix and exceeds {max_len} tokens")

    fragments: list[tuple[Token, ...]] = []
    rest = verse.tokens
    while len(rest) > max_len:
        cut = max_len
        for i in range(max_len - 1, -1, -1):
            if rest[i].form in MAJOR_PUNCTUATION:
                cut = i + 1
                break
        fragments.append(rest[:cut])
        rest = rest[cut:]
    if rest:
        fragments.append(rest)
    if len(fragments) > len(_SUFFIXES):
        raise PreprocessError(f"verse {verse.id} would split into {len(fragments)} fragments; suffixes a-z exhausted")
    base = verse.id
    return [
        Verse(VerseId(base.book, base.chapter, base.verse, _SUFFIXES[k]), frag)
        for k, frag in enumerate(fragments)
    ]


def verify_parallel(pairs_or_gap) -> ParallelReport:
    """Report non-corresponding verses from parse_parallel output (or its gap error)."""
    if isinstance(pairs_or_gap, ParallelGapError):
        return ParallelReport(
            missing_in_source=tuple(sorted(pairs_or_gap.missing_in_source)),
            missing_in_target=tuple(sorted(pairs_or_gap.missing_in_target)),
        )
    return ParallelReport()


def _normalize_verse(verse: Verse, removed: Counter, substitutions: dict[str, str] | None) -> Verse:
    tokens = []
    for tok in verse.tokens:
        form = tok.form
        if substitutions:
            form = substitutions.get(form, form)
        form = normalize_token(form, removed)
        if form is None:
            continue
        tokens.append(Token(form, tok.tag, tok.truth))
    return Verse(verse.id, tuple(tokens))


def preprocess_corpus(
    pairs: list[tuple[Verse, Verse]],
    max_len: int = 100,
    substitutions: dict[str, str] | None = None,
) -> tuple[list[tuple[Verse, Verse]], ParallelReport]:
    """Normalize tokens, split over-long verses, and re-pair both sides.

    Verses that vanish entirely under normalization, and split verses whose
    fragment counts differ across sides, are dropped and reported.
    """
    removed: Counter = Counter()
    missing_in_source: list[VerseId] = []
    missing_in_target: list[VerseId] = []

    surviving: list[tuple[Verse, Verse]] = []
    for sv, tv in pairs:
        s2 = _normalize_verse(sv, removed, substitutions)
        t2 = _normalize_verse(tv, removed, substitutions)
        if not s2.tokens:
            missing_in_source.append(sv.id)
        if not t2.tokens:
            missing_in_target.append(tv.id)
        if s2.tokens and t2.tokens:
            surviving.append((s2, t2))

    split_records: set[tuple[VerseId, int]] = set()
    out_pairs: list[tuple[Verse, Verse]] = []

    # Split each side, then re-verify correspondence: equal fragment counts
    # re-pair by suffix; unequal counts drop every fragment of the pair.
    for s2, t2 in surviving:
        source_frags = split_long_verse(s2, max_len)
        target_frags = split_long_verse(t2, max_len)
        if len(source_frags) > 1:
            split_records.add((s2.id, len(source_frags)))
        if len(target_frags) > 1:
            split_records.add((t2.id, len(target_frags)))
        if len(source_frags) == len(target_frags):
            out_pairs.extend(zip(source_frags, target_frags))
        else:
            missing_in_target.extend(v.id for v in source_frags)
            missing_in_source.extend(v.id for v in target_frags)

    report = ParallelReport(
        missing_in_source=tuple(sorted(missing_in_source)),
        missing_in_target=tuple(sorted(missing_in_target)),
        split_verses=tuple(sorted(split_records)),
        removed_symbols=tuple(sorted(removed.items())),
    )
    return out_pairs, report


def parse_substitutions(content: str) -> dict[str, str]:
    """Parse an ad-hoc token substitution table: one ``from<TAB>to`` per line."""
    table = {}
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        src, sep, dst = line.partition("\t")
        if not sep or not src or not dst:
            raise PreprocessError(f"substitution table line {lineno}: expected 'from<TAB>to'")
        table[src] = dst
    return table
