"""Cross-lingual tag projection: copy source tags through alignment links and
disambiguate multi-tag tokens, producing the initial errorful target corpus.

Disambiguation picks the most frequent candidate tag; ties fall back to the
corpus-wide ratio count(tag, word) / count(tag), then to the lexicographically
smallest label. Unaligned tokens receive the reserved UNK label.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .align import Alignment, validate_alignment
from .corpus import TaggedCorpus, Token, UNTAGGED_LABEL, Verse
from .errors import ProjectionError


@dataclass(frozen=True)
class CandidateSet:
    """Tags projected onto one target token, in increasing source position order."""

    word: str
    candidates: tuple[str, ...]


@dataclass
class ProjectionStats:
    """Corpus-wide candidate-tag counts: C(tag, word) and the marginal C(tag)."""

    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    tag_counts: dict[str, int] = field(default_factory=dict)

    def ratio(self, tag: str, word: str) -> float:
        denom = self.tag_counts.get(tag, 0)
        if denom == 0:
            return 0.0
        return self.pair_counts.get((tag, word), 0) / denom


@dataclass(frozen=True)
class OneToManyStat:
    multi_count: int
    token_total: int

    @property
    def fraction(self) -> float:
        return self.multi_count / self.token_total if self.token_total else 0.0


def collect_candidates(
    pair: tuple[Verse, Verse],
    alignment: Alignment,
    source_tags: list[str],
) -> list[CandidateSet]:
    """One CandidateSet per target token, tags taken from its linked source positions."""
    source, target = pair
    if len(source_tags) != len(source.tokens):
        raise ProjectionError(
            f"verse {source.id}: {len(source_tags)} source tags for {len(source.tokens)} tokens"
        )
    validate_alignment(alignment, pair)
    by_target: dict[int, list[int]] = defaultdict(list)
    for t, s in alignment.links:
        by_target[t].append(s)
    out = []
    for tpos, tok in enumerate(target.tokens):
        sources = sorted(by_target.get(tpos, ()))
        out.append(CandidateSet(tok.form, tuple(source_tags[s] for s in sources)))
    return out


def build_stats(candidate_sets) -> ProjectionStats:
    """Count every (word, candidate tag) occurrence before any disambiguation."""
    stats = ProjectionStats()
    for cs in candidate_sets:
        for tag in cs.candidates:
            key = (tag, cs.word)
            stats.pair_counts[key] = stats.pair_counts.get(key, 0) + 1
            stats.tag_counts[tag] = stats.tag_counts.get(tag, 0) + 1
    return stats


def disambiguate(cs: CandidateSet, stats: ProjectionStats) -> str:
    """Pick one tag from a non-empty candidate multiset.

    Highest multiplicity wins; among multiplicity ties the highest
    count(tag, word)/count(tag) ratio wins; remaining ties go to the
    lexicographically smallest label.
    """
    if not cs.candidates:
        raise ProjectionError(f"empty candidate set for {cs.word!r}")
    counts = Counter(cs.candidates)
    top = max(counts.values())
    tied = sorted(tag for tag, n in counts.items() if n == top)
    if len(tied) == 1:
        return tied[0]
    best = tied[0]
    best_ratio = stats.ratio(best, cs.word)
    for tag in tied[1:]:
        r = stats.ratio(tag, cs.word)
        if r > best_ratio:
            best, best_ratio = tag, r
    return best


def project_corpus(
    pairs: list[tuple[Verse, Verse]],
    alignments: list[Alignment],
    source_tag_columns: list[list[str]],
) -> tuple[TaggedCorpus, OneToManyStat]:
    """Project and disambiguate the whole corpus into a 1-column target corpus.

    Also returns the one-to-many statistic: how many target tokens carried
    two or more candidate tags.
    """
    if not (len(pairs) == len(alignments) == len(source_tag_columns)):
        raise ProjectionError(
            f"inconsistent counts: {len(pairs)} pairs, {len(alignments)} alignments, "
            f"{len(source_tag_columns)} source tag columns"
        )
    per_verse: list[list[CandidateSet]] = []
    for pair, alignment, tags in zip(pairs, alignments, source_tag_columns):
        per_verse.append(collect_candidates(pair, alignment, tags))

    stats = build_stats(cs for verse_sets in per_verse for cs in verse_sets)

    verses = []
    multi = 0
    total = 0
    for (_, target), verse_sets in zip(pairs, per_verse):
        tokens = []
        for tok, cs in zip(target.tokens, verse_sets):
            total += 1
            if len(cs.candidates) >= 2:
                multi += 1
            tag = disambiguate(cs, stats) if cs.candidates else UNTAGGED_LABEL
            tokens.append(Token(tok.form, tag))
        verses.append(Verse(target.id, tuple(tokens)))
    return TaggedCorpus(tuple(verses), columns=1), OneToManyStat(multi, total)
