"""Core data types and file formats for tagged verse corpora.

All types are immutable values; parsing and serialization are pure functions.
Files are UTF-8, LF-terminated, tab-separated:

  tagset file     one ``LABEL<TAB>description`` per line, ``#`` comments allowed
  vertical file   blank-line separated blocks, each ``# id=book:ch:verse[a-z]``
                  followed by ``form<TAB>tag`` (1 column) or
                  ``form<TAB>initial<TAB>truth`` (2 columns)
  parallel file   one ``book:ch:verse[a-z]<TAB>space-tokenized text`` per line
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CorpusFormatError, ParallelGapError

# Reserved label for tokens that no projected tag reaches. It lives outside
# every tagset; parse_tagset rejects it so membership tests always fail on it.
UNTAGGED_LABEL = "UNK"

_ID_RE = re.compile(r"^(?P<book>[^:\s]+):(?P<chapter>\d+):(?P<verse>\d+)(?P<suffix>[a-z]?)$")


@dataclass(frozen=True, order=True)
class VerseId:
    """Identifier of a (possibly split) verse; suffix marks split fragments."""

    book: str
    chapter: int
    verse: int
    suffix: str = ""

    def __post_init__(self):
        if self.chapter < 1 or self.verse < 1:
            raise CorpusFormatError(f"chapter/verse must be positive: {self.book}:{self.chapter}:{self.verse}")
        if self.suffix and (len(self.suffix) != 1 or not "a" <= self.suffix <= "z"):
            raise CorpusFormatError(f"verse suffix must be a single letter a-z: {self.suffix!r}")

    def __str__(self):
        return f"{self.book}:{self.chapter}:{self.verse}{self.suffix}"

    @classmethod
    def parse(cls, text: str) -> "VerseId":
        m = _ID_RE.match(text)
        if not m:
            raise CorpusFormatError(f"malformed verse id: {text!r}")
        return cls(m.group("book"), int(m.group("chapter")), int(m.group("verse")), m.group("suffix"))


@dataclass(frozen=True)
class Token:
    """A surface form with an optional current tag and optional truth tag."""

    form: str
    tag: str | None = None
    truth: str | None = None


@dataclass(frozen=True)
class Verse:
    id: VerseId
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class TaggedCorpus:
    """Ordered verses carrying 1 (current) or 2 (current + truth) tag columns."""

    verses: tuple[Verse, ...]
    columns: int = 1
    tagset_name: str = ""

    def __len__(self):
        return len(self.verses)

    def token_count(self) -> int:
        return sum(len(v.tokens) for v in self.verses)

    def index(self) -> dict[VerseId, Verse]:
        return {v.id: v for v in self.verses}


@dataclass(frozen=True)
class Tagset:
    """Named, ordered, closed set of tag labels with descriptions."""

    name: str
    entries: tuple[tuple[str, str], ...]
    _labels: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_labels", frozenset(label for label, _ in self.entries))

    def __contains__(self, label) -> bool:
        return label in self._labels

    def __len__(self):
        return len(self.entries)

    def labels(self) -> list[str]:
        return [label for label, _ in self.entries]


def _check_label(label: str, where: str):
    if not label:
        raise CorpusFormatError(f"{where}: empty tag label")
    if any(c.isspace() for c in label):
        raise CorpusFormatError(f"{where}: tag label contains whitespace: {label!r}")


def parse_tagset(content: str, name: str = "") -> Tagset:
    """Parse ``LABEL<TAB>description`` lines into a Tagset, preserving order."""
    entries = []
    seen = {}
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        label, _, description = line.partition("\t")
        _check_label(label, f"line {lineno}")
        if label == UNTAGGED_LABEL:
            raise CorpusFormatError(f"line {lineno}: label {UNTAGGED_LABEL!r} is reserved for untagged tokens")
        if label in seen:
            raise CorpusFormatError(f"line {lineno}: duplicate label {label!r} (first seen on line {seen[label]})")
        seen[label] = lineno
        entries.append((label, description.strip()))
    return Tagset(name, tuple(entries))


def serialize_tagset(tagset: Tagset) -> str:
    return "".join(f"{label}\t{description}\n" for label, description in tagset.entries)


def parse_vertical(content: str, expected_columns: int) -> TaggedCorpus:
    """Parse a 1- or 2-column vertical corpus file."""
    if expected_columns not in (1, 2):
        raise ValueError(f"expected_columns must be 1 or 2, got {expected_columns}")
    lines = content.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    tagset_name = ""
    start = 0
    if lines and lines[0].startswith("# tagset="):
        tagset_name = lines[0][len("# tagset="):]
        start = 1

    verses: list[Verse] = []
    seen: set[VerseId] = set()
    block: list[tuple[int, str]] = []

    def flush():
        if not block:
            return
        lineno, header = block[0]
        if not header.startswith("# id="):
            raise CorpusFormatError(f"line {lineno}: block must start with '# id=...', got {header!r}")
        vid = VerseId.parse(header[len("# id="):])
        if vid in seen:
            raise CorpusFormatError(f"line {lineno}: duplicate verse id {vid}")
        seen.add(vid)
        tokens = []
        for tok_lineno, line in block[1:]:
            cols = line.split("\t")
            if len(cols) != expected_columns + 1:
                raise CorpusFormatError(
                    f"verse {vid}, line {tok_lineno}: expected {expected_columns + 1} "
                    f"tab-separated columns, got {len(cols)}"
                )
            form = cols[0]
            if not form:
                raise CorpusFormatError(f"verse {vid}, line {tok_lineno}: empty token form")
            for tag in cols[1:]:
                _check_label(tag, f"verse {vid}, line {tok_lineno}")
            if expected_columns == 1:
                tokens.append(Token(form, cols[1]))
            else:
                tokens.append(Token(form, cols[1], cols[2]))
        if not tokens:
            raise CorpusFormatError(f"verse {vid}: no tokens (token count must be >= 1)")
        verses.append(Verse(vid, tuple(tokens)))

    for lineno, line in enumerate(lines[start:], start + 1):
        if line == "":
            flush()
            block = []
        else:
            block.append((lineno, line))
    flush()
    return TaggedCorpus(tuple(verses), expected_columns, tagset_name)


def serialize_vertical(corpus: TaggedCorpus) -> str:
    """Exact inverse of parse_vertical: LF endings, tabs, one blank line between blocks."""
    blocks = []
    for verse in corpus.verses:
        lines = [f"# id={verse.id}"]
        for pos, tok in enumerate(verse.tokens):
            if tok.tag is None:
                raise CorpusFormatError(f"verse {verse.id}, token {pos}: missing tag column")
            if corpus.columns == 1:
                lines.append(f"{tok.form}\t{tok.tag}")
            else:
                if tok.truth is None:
                    raise CorpusFormatError(f"verse {verse.id}, token {pos}: missing truth column")
                lines.append(f"{tok.form}\t{tok.tag}\t{tok.truth}")
        blocks.append("\n".join(lines))
    prefix = f"# tagset={corpus.tagset_name}\n" if corpus.tagset_name else ""
    return prefix + "\n\n".join(blocks) + "\n"


def _parse_parallel_side(content: str, side: str) -> list[Verse]:
    verses = []
    seen = {}
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip():
            continue
        id_text, sep, text = line.partition("\t")
        if not sep:
            raise CorpusFormatError(f"{side} line {lineno}: expected '<id><TAB><text>'")
        vid = VerseId.parse(id_text)
        if vid in seen:
            raise CorpusFormatError(f"{side} line {lineno}: duplicate verse id {vid}")
        seen[vid] = lineno
        forms = text.split()
        if not forms:
            raise CorpusFormatError(f"{side} line {lineno}: verse {vid} has no tokens")
        verses.append(Verse(vid, tuple(Token(f) for f in forms)))
    return verses


def parse_parallel(source_content: str, target_content: str) -> list[tuple[Verse, Verse]]:
    """Pair source and target verses by id, in source file order.

    Raises ParallelGapError when ids appear on only one side; the error carries
    the matched pairs and both unmatched-id lists so the caller can drop gaps.
    """
    source = _parse_parallel_side(source_content, "source")
    target = _parse_parallel_side(target_content, "target")
    target_map = {v.id: v for v in target}
    source_ids = {v.id for v in source}
    pairs = [(sv, target_map[sv.id]) for sv in source if sv.id in target_map]
    missing_in_target = sorted(v.id for v in source if v.id not in target_map)
    missing_in_source = sorted(v.id for v in target if v.id not in source_ids)
    if missing_in_source or missing_in_target:
        raise ParallelGapError(missing_in_source, missing_in_target, pairs)
    return pairs


def serialize_parallel_side(verses: list[Verse]) -> str:
    return "".join(f"{v.id}\t{' '.join(t.form for t in v.tokens)}\n" for v in verses)
