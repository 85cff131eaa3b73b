"""Transformation-based error-driven learning.

A rule rewrites a token's current tag (from_tag -> to_tag) when every slot of
its context template matches the neighborhood. Learning greedily picks the
best-scoring rule, applies it, and repeats until the best score drops to the
threshold.

Semantics pinned here and recorded in rule-file headers:
  * scoring counts rule firings against the frozen corpus state (no cascade);
  * application sweeps each verse left to right with immediate updates, so a
    change can enable the same rule at a later position in the verse;
  * context offsets that fall outside the verse read as the reserved
    out-of-verse marker, which is assumed never to occur as a real word or tag;
  * ties between equal-scoring rules go to the canonical order
    (template id, from_tag, to_tag, slot values).
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field

from .corpus import TaggedCorpus, Token, Verse
from .errors import RuleFormatError

# Context value for offsets beyond either end of a verse.
OUT_OF_VERSE = "<OOV>"

DEFAULT_THETA = 2

_SLOT_RE = re.compile(r"^(word|tag)\[([+-]?\d+)\]$")
_CTX_ANCHOR_RE = re.compile(r"(word|tag)\[([+-]?\d+)\]=")


@dataclass(frozen=True)
class Template:
    """A context shape: ordered slots of (offset, field) within a +/-3 window."""

    id: str
    slots: tuple[tuple[int, str], ...]

    def __post_init__(self):
        if not self.id or any(c.isspace() for c in self.id):
            raise RuleFormatError(f"bad template id {self.id!r}")
        if not self.slots:
            raise RuleFormatError(f"template {self.id}: needs at least one slot")
        for offset, fieldname in self.slots:
            if not -3 <= offset <= 3:
                raise RuleFormatError(f"template {self.id}: offset {offset} outside -3..+3")
            if fieldname not in ("word", "tag"):
                raise RuleFormatError(f"template {self.id}: unknown field {fieldname!r}")


# The classic contextual template set; override via a template file.
DEFAULT_TEMPLATES: tuple[Template, ...] = (
    Template("PREVTAG", ((-1, "tag"),)),
    Template("NEXTTAG", ((1, "tag"),)),
    Template("PREV2TAG", ((-2, "tag"),)),
    Template("NEXT2TAG", ((2, "tag"),)),
    Template("PREVBIGRAM", ((-1, "tag"), (-2, "tag"))),
    Template("NEXTBIGRAM", ((1, "tag"), (2, "tag"))),
    Template("SURROUNDTAG", ((-1, "tag"), (1, "tag"))),
    Template("CURWORD", ((0, "word"),)),
    Template("PREVWORD", ((-1, "word"),)),
    Template("NEXTWORD", ((1, "word"),)),
    Template("WDPREVTAG", ((0, "word"), (-1, "tag"))),
    Template("WDNEXTTAG", ((0, "word"), (1, "tag"))),
)


@dataclass(frozen=True)
class Rule:
    """A concrete transformation: from_tag -> to_tag under a filled-in template."""

    from_tag: str
    to_tag: str
    template_id: str
    slots: tuple[tuple[int, str], ...] = field(compare=False)
    values: tuple[str, ...]
    score: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.from_tag == self.to_tag:
            raise RuleFormatError(f"rule must change the tag: {self.from_tag} -> {self.to_tag}")
        if len(self.slots) != len(self.values):
            raise RuleFormatError("slot/value count mismatch")

    def sort_key(self):
        return (self.template_id, self.from_tag, self.to_tag, self.values)

    def context_text(self) -> str:
        parts = [
            f"{fieldname}[{offset}]={value}"
            for (offset, fieldname), value in zip(self.slots, self.values)
        ]
        return ";".join(parts)


@dataclass(frozen=True)
class RuleList:
    """Rules in learning order plus the threshold they were learned with.

    realized_reductions holds each accepted rule's actual training-set error
    reduction, recomputed after its application (cascades can make it differ
    from the frozen-state score).
    """

    rules: tuple[Rule, ...]
    theta: int = DEFAULT_THETA
    realized_reductions: tuple[int, ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.rules)


def parse_templates(content: str) -> tuple[Template, ...]:
    """Parse a template file: ``id<TAB>slot,slot,...`` with slots like tag[-1]."""
    templates = []
    seen = set()
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip() or line.startswith("#"):
            continue
        tpl_id, sep, slot_text = line.partition("\t")
        if not sep:
            raise RuleFormatError(f"template line {lineno}: expected 'id<TAB>slots'")
        if tpl_id in seen:
            raise RuleFormatError(f"template line {lineno}: duplicate id {tpl_id!r}")
        seen.add(tpl_id)
        slots = []
        for part in slot_text.split(","):
            m = _SLOT_RE.match(part.strip())
            if not m:
                raise RuleFormatError(f"template line {lineno}: bad slot {part!r}")
            slots.append((int(m.group(2)), m.group(1)))
        templates.append(Template(tpl_id, tuple(slots)))
    return tuple(templates)


def serialize_templates(templates) -> str:
    lines = []
    for tpl in templates:
        slot_text = ",".join(f"{fieldname}[{offset}]" for offset, fieldname in tpl.slots)
        lines.append(f"{tpl.id}\t{slot_text}")
    return "".join(line + "\n" for line in lines)


def _parse_ctx(text: str, lineno: int) -> tuple[tuple[tuple[int, str], ...], tuple[str, ...]]:
    matches = list(_CTX_ANCHOR_RE.finditer(text))
    if not matches or matches[0].start() != 0:
        raise RuleFormatError(f"rule line {lineno}: bad context {text!r}")
    slots = []
    values = []
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        value = text[m.end():end]
        if i + 1 < len(matches):
            if not value.endswith(";"):
                raise RuleFormatError(f"rule line {lineno}: bad context {text!r}")
            value = value[:-1]
        if not value:
            raise RuleFormatError(f"rule line {lineno}: empty slot value in {text!r}")
        slots.append((int(m.group(2)), m.group(1)))
        values.append(value)
    return tuple(slots), tuple(values)


def serialize_rules(rule_list: RuleList) -> str:
    """Order-significant rule file with the training threshold in the header."""
    lines = [
        "# tbl rules",
        f"# theta={rule_list.theta}",
        "# scoring=frozen-state application=left-to-right-cascade",
    ]
    for rule in rule_list.rules:
        lines.append(
            f"from={rule.from_tag} to={rule.to_tag} tpl={rule.template_id} "
            f"ctx={rule.context_text()} score={rule.score}"
        )
    return "".join(line + "\n" for line in lines)


def parse_rules(content: str) -> RuleList:
    rules = []
    theta = DEFAULT_THETA
    for lineno, line in enumerate(content.split("\n"), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            m = re.match(r"^#\s*theta=(-?\d+)$", line)
            if m:
                theta = int(m.group(1))
            continue
        fields = line.split(" ")
        if len(fields) != 5:
            raise RuleFormatError(f"rule line {lineno}: expected 5 space-separated fields")
        parsed = {}
        for fld, prefix in zip(fields, ("from=", "to=", "tpl=", "ctx=", "score=")):
            if not fld.startswith(prefix):
                raise RuleFormatError(f"rule line {lineno}: expected {prefix}..., got {fld!r}")
            parsed[prefix[:-1]] = fld[len(prefix):]
        slots, values = _parse_ctx(parsed["ctx"], lineno)
        try:
            score = int(parsed["score"])
        except ValueError:
            raise RuleFormatError(f"rule line {lineno}: bad score {parsed['score']!r}")
        rules.append(Rule(parsed["from"], parsed["to"], parsed["tpl"], slots, values, score))
    return RuleList(tuple(rules), theta)


def _context_values(slots, forms, tags, pos: int, n: int) -> tuple[str, ...]:
    values = []
    for offset, fieldname in slots:
        q = pos + offset
        if 0 <= q < n:
            values.append(forms[q] if fieldname == "word" else tags[q])
        else:
            values.append(OUT_OF_VERSE)
    return tuple(values)


def _matches(rule: Rule, forms, tags, pos: int, n: int) -> bool:
    for (offset, fieldname), value in zip(rule.slots, rule.values):
        q = pos + offset
        if 0 <= q < n:
            actual = forms[q] if fieldname == "word" else tags[q]
        else:
            actual = OUT_OF_VERSE
        if actual != value:
            return False
    return True


def rule_applies(rule: Rule, verse: Verse, pos: int) -> bool:
    """True iff the current tag at pos equals from_tag and every slot matches."""
    if not 0 <= pos < len(verse.tokens):
        raise IndexError(f"position {pos} out of range for verse {verse.id}")
    forms = [t.form for t in verse.tokens]
    tags = [t.tag for t in verse.tokens]
    if tags[pos] != rule.from_tag:
        return False
    return _matches(rule, forms, tags, pos, len(tags))


def _require_training(corpus: TaggedCorpus):
    if corpus.columns != 2:
        raise RuleFormatError("training requires a 2-column (current + truth) corpus")


def score_rule(rule: Rule, corpus: TaggedCorpus) -> int:
    """Frozen-state score: firings that fix an error minus firings that break a correct tag."""
    _require_training(corpus)
    fixed = 0
    broken = 0
    for verse in corpus.verses:
        forms = [t.form for t in verse.tokens]
        tags = [t.tag for t in verse.tokens]
        n = len(tags)
        for pos in range(n):
            if tags[pos] != rule.from_tag or not _matches(rule, forms, tags, pos, n):
                continue
            truth = verse.tokens[pos].truth
            if tags[pos] == truth:
                broken += 1
            elif rule.to_tag == truth:
                fixed += 1
    return fixed - broken


def generate_candidates(corpus: TaggedCorpus, templates=DEFAULT_TEMPLATES) -> set[Rule]:
    """Instantiate every template at every error position; deduplicated."""
    _require_training(corpus)
    out = set()
    for verse in corpus.verses:
        forms = [t.form for t in verse.tokens]
        tags = [t.tag for t in verse.tokens]
        n = len(tags)
        for pos, tok in enumerate(verse.tokens):
            if tok.tag == tok.truth:
                continue
            for tpl in templates:
                values = _context_values(tpl.slots, forms, tags, pos, n)
                out.add(Rule(tok.tag, tok.truth, tpl.id, tpl.slots, values))
    return out


def _apply_rule_to_verse(rule: Rule, forms, tags) -> list[int]:
    """Left-to-right sweep with immediate updates; returns changed positions."""
    n = len(tags)
    from_tag = rule.from_tag
    to_tag = rule.to_tag
    changed = []
    for pos in range(n):
        if tags[pos] == from_tag and _matches(rule, forms, tags, pos, n):
            tags[pos] = to_tag
            changed.append(pos)
    return changed


class _Learner:
    """Incremental candidate index over the training corpus.

    good maps (template id, from, to, values) to the number of error positions
    the rule would fix; bad maps (template id, from, values) to the number of
    correct positions any rule with that left side would break. Scores live on
    a lazy max-heap keyed by the canonical rule order, re-pushed whenever a
    position's contribution changes, so stale entries are skipped at pop time.
    """

    def __init__(self, corpus: TaggedCorpus, templates, theta: int):
        self.templates = tuple(templates)
        ids = [tpl.id for tpl in self.templates]
        if len(set(ids)) != len(ids):
            raise RuleFormatError("duplicate template ids")
        self.slots_by_id = {tpl.id: tpl.slots for tpl in self.templates}
        self.theta = theta
        self.verses = [
            ([t.form for t in v.tokens], [t.tag for t in v.tokens], [t.truth for t in v.tokens])
            for v in corpus.verses
        ]
        self.good: dict[tuple, int] = {}
        self.bad: dict[tuple, int] = {}
        self.tos: dict[tuple, set[str]] = {}
        self.heap: list = []
        self.errors = 0
        for forms, tags, truths in self.verses:
            n = len(tags)
            for pos in range(n):
                self._add_position(forms, tags, truths, pos, n, +1, None, None)
            self.errors += sum(1 for pos in range(n) if tags[pos] != truths[pos])
        for key in self.good:
            self._push(key)

    def _add_position(self, forms, tags, truths, pos, n, sign, touched_good, touched_bad):
        cur = tags[pos]
        truth = truths[pos]
        if cur == truth:
            for tpl in self.templates:
                values = _context_values(tpl.slots, forms, tags, pos, n)
                bkey = (tpl.id, cur, values)
                self.bad[bkey] = self.bad.get(bkey, 0) + sign
                if touched_bad is not None:
                    touched_bad.add(bkey)
        else:
            for tpl in self.templates:
                values = _context_values(tpl.slots, forms, tags, pos, n)
                key = (tpl.id, cur, truth, values)
                self.good[key] = self.good.get(key, 0) + sign
                if sign > 0:
                    self.tos.setdefault((tpl.id, cur, values), set()).add(truth)
                if touched_good is not None:
                    touched_good.add(key)

    def _score(self, key) -> int:
        tpl_id, from_tag, to_tag, values = key
        return self.good.get(key, 0) - self.bad.get((tpl_id, from_tag, values), 0)

    def _push(self, key):
        if self.good.get(key, 0) > 0:
            heapq.heappush(self.heap, (-self._score(key), key))

    def pop_best(self):
        """Best current candidate as (score, key), or None when none beats theta."""
        while self.heap:
            neg, key = heapq.heappop(self.heap)
            g = self.good.get(key, 0)
            if g <= 0 or self._score(key) != -neg:
                continue
            if -neg <= self.theta:
                return None
            return -neg, key
        return None

    def apply(self, rule: Rule) -> int:
        """Apply the rule corpus-wide, maintaining the index; returns error reduction."""
        touched_good: set = set()
        touched_bad: set = set()
        delta = 0
        for forms, tags, truths in self.verses:
            if rule.from_tag not in tags:
                continue
            n = len(tags)
            fires = any(
                tags[pos] == rule.from_tag and _matches(rule, forms, tags, pos, n)
                for pos in range(n)
            )
            if not fires:
                continue
            for pos in range(n):
                self._add_position(forms, tags, truths, pos, n, -1, touched_good, touched_bad)
            for pos in _apply_rule_to_verse(rule, forms, tags):
                was_wrong = rule.from_tag != truths[pos]
                now_wrong = rule.to_tag != truths[pos]
                delta += int(was_wrong) - int(now_wrong)
            for pos in range(n):
                self._add_position(forms, tags, truths, pos, n, +1, touched_good, touched_bad)
        for key in touched_good:
            self._push(key)
        for bkey in touched_bad:
            tpl_id, from_tag, values = bkey
            for to_tag in self.tos.get(bkey, ()):
                self._push((tpl_id, from_tag, to_tag, values))
        self.errors -= delta
        return delta


def learn(corpus: TaggedCorpus, templates=DEFAULT_TEMPLATES, theta: int = DEFAULT_THETA) -> RuleList:
    """Greedy rule learning over a 2-column corpus.

    The given current column is the starting state as-is; learning stops when
    the best candidate's frozen-state score is <= theta or no candidates
    remain.
    """
    if theta < 1:
        raise ValueError(f"theta must be >= 1, got {theta}")
    _require_training(corpus)
    engine = _Learner(corpus, templates, theta)
    rules = []
    realized = []
    # Safety net against pathological cascade loops; unreachable on real data.
    max_steps = engine.errors * 4 + 64
    while True:
        best = engine.pop_best()
        if best is None:
            break
        score, (tpl_id, from_tag, to_tag, values) = best
        rule = Rule(from_tag, to_tag, tpl_id, engine.slots_by_id[tpl_id], values, score)
        realized.append(engine.apply(rule))
        rules.append(rule)
        if len(rules) > max_steps:
            raise RuleFormatError("rule learning failed to converge")
    return RuleList(tuple(rules), theta, tuple(realized))


def apply_rules(rule_list: RuleList, corpus: TaggedCorpus) -> TaggedCorpus:
    """Apply rules in order to the current-tag column of a 1- or 2-column corpus."""
    new_verses = []
    for verse in corpus.verses:
        forms = [t.form for t in verse.tokens]
        tags = [t.tag for t in verse.tokens]
        for rule in rule_list.rules:
            if rule.from_tag in tags:
                _apply_rule_to_verse(rule, forms, tags)
        new_verses.append(
            Verse(
                verse.id,
                tuple(
                    Token(tok.form, tag, tok.truth)
                    for tok, tag in zip(verse.tokens, tags)
                ),
            )
        )
    return TaggedCorpus(tuple(new_verses), corpus.columns, corpus.tagset_name)
