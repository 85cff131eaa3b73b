import sys
from pathlib import Path

from tagboot.corpus import TaggedCorpus, Token, Verse, VerseId

sys.path.insert(0, str(Path(__file__).parent))


def make_verse(id_text, rows):
    """rows: (form,), (form, tag), or (form, tag, truth) tuples."""
    tokens = tuple(Token(*row) for row in rows)
    return Verse(VerseId.parse(id_text), tokens)


def make_corpus(verse_rows, columns=1):
    """verse_rows: dict id_text -> rows (insertion order preserved)."""
    verses = tuple(make_verse(vid, rows) for vid, rows in verse_rows.items())
    return TaggedCorpus(verses, columns)
