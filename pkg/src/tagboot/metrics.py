"""Evaluation: tagging accuracy, error rate, and tag transformation rate.

Counts are the stored ground truth; rates are always derived from counts.
The transformation rate counts tokens whose tag is a member of the target
tagset; the stricter in-tagset-and-correct reading is kept alongside as an
auxiliary count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import TaggedCorpus, Tagset
from .errors import TagbootError

CSV_HEADER = "state,accuracy,error_rate,transformation_rate,token_total,correct_count,in_target_count"


@dataclass(frozen=True)
class MetricsRecord:
    label: str
    token_total: int
    correct_count: int
    in_target_tagset_count: int
    transformed_and_correct_count: int = 0

    @property
    def accuracy(self) -> float:
        return self.correct_count / self.token_total if self.token_total else 0.0

    @property
    def error_rate(self) -> float:
        return 1.0 - self.accuracy

    @property
    def transformation_rate(self) -> float:
        return self.in_target_tagset_count / self.token_total if self.token_total else 0.0

    @property
    def transformed_and_correct_rate(self) -> float:
        return self.transformed_and_correct_count / self.token_total if self.token_total else 0.0


def _check_structure(predicted: TaggedCorpus, gold: TaggedCorpus):
    if len(predicted.verses) != len(gold.verses):
        raise TagbootError(
            f"corpora differ in verse count: {len(predicted.verses)} vs {len(gold.verses)}"
        )
    for pv, gv in zip(predicted.verses, gold.verses):
        if pv.id != gv.id:
            raise TagbootError(f"verse id mismatch: {pv.id} vs {gv.id}")
        if len(pv.tokens) != len(gv.tokens):
            raise TagbootError(
                f"verse {pv.id}: token count mismatch ({len(pv.tokens)} vs {len(gv.tokens)})"
            )


def accuracy(predicted: TaggedCorpus, gold: TaggedCorpus) -> float:
    """Exact-match tag accuracy over all tokens."""
    _check_structure(predicted, gold)
    total = 0
    correct = 0
    for pv, gv in zip(predicted.verses, gold.verses):
        for pt, gt in zip(pv.tokens, gv.tokens):
            total += 1
            if pt.tag == gt.tag:
                correct += 1
    if total == 0:
        raise TagbootError("cannot compute accuracy over zero tokens")
    return correct / total


def transformation_rate(corpus: TaggedCorpus, target_tagset: Tagset) -> float:
    """Fraction of tokens whose tag label belongs to the target tagset."""
    total = 0
    in_target = 0
    for verse in corpus.verses:
        for tok in verse.tokens:
            total += 1
            if tok.tag in target_tagset:
                in_target += 1
    return in_target / total if total else 0.0


def evaluate(predicted: TaggedCorpus, gold: TaggedCorpus, target_tagset: Tagset, label: str) -> MetricsRecord:
    """Full per-state record: accuracy and transformation counts in one pass."""
    _check_structure(predicted, gold)
    total = correct = in_target = both = 0
    for pv, gv in zip(predicted.verses, gold.verses):
        for pt, gt in zip(pv.tokens, gv.tokens):
            total += 1
            is_correct = pt.tag == gt.tag
            is_member = pt.tag in target_tagset
            correct += is_correct
            in_target += is_member
            both += is_correct and is_member
    return MetricsRecord(label, total, correct, in_target, both)


@dataclass(frozen=True)
class Report:
    table: str
    csv: str
    accuracy_series: str
    transformation_series: str


def _pct(value: float) -> str:
    return f"{value * 100:.2f}%"


def emit_report(records: list[MetricsRecord]) -> Report:
    """Render records as a human table, a CSV, and two plot-ready series."""
    if not records:
        raise TagbootError("emit_report requires at least one record")
    label_width = max(len("state"), max(len(r.label) for r in records))
    table_lines = [
        f"{'state':<{label_width}}  {'accuracy':>10}  {'error_rate':>10}  {'transformation_rate':>19}"
    ]
    for r in records:
        table_lines.append(
            f"{r.label:<{label_width}}  {_pct(r.accuracy):>10}  {_pct(r.error_rate):>10}  "
            f"{_pct(r.transformation_rate):>19}"
        )
    csv_lines = [CSV_HEADER]
    for r in records:
        csv_lines.append(
            f"{r.label},{r.accuracy!r},{r.error_rate!r},{r.transformation_rate!r},"
            f"{r.token_total},{r.correct_count},{r.in_target_tagset_count}"
        )
    acc_lines = [f"{r.label}\t{r.accuracy!r}" for r in records]
    rate_lines = [f"{r.label}\t{r.transformation_rate!r}" for r in records]
    return Report(
        table="".join(line + "\n" for line in table_lines),
        csv="".join(line + "\n" for line in csv_lines),
        accuracy_series="".join(line + "\n" for line in acc_lines),
        transformation_series="".join(line + "\n" for line in rate_lines),
    )


def confusion_table(predicted: TaggedCorpus, gold: TaggedCorpus) -> str:
    """Per-(gold, predicted) tag pair counts, TSV, sorted; plumbing only."""
    _check_structure(predicted, gold)
    counts: dict[tuple[str, str], int] = {}
    for pv, gv in zip(predicted.verses, gold.verses):
        for pt, gt in zip(pv.tokens, gv.tokens):
            key = (gt.tag, pt.tag)
            counts[key] = counts.get(key, 0) + 1
    lines = [f"{g}\t{p}\t{n}" for (g, p), n in sorted(counts.items())]
    return "".join(line + "\n" for line in lines)


def parse_metrics_csv(content: str) -> list[MetricsRecord]:
    """Read records back from CSV; rates are re-derived from the counts."""
    lines = [line for line in content.split("\n") if line]
    if not lines or lines[0] != CSV_HEADER:
        raise TagbootError("bad metrics CSV header")
    records = []
    for line in lines[1:]:
        cols = line.split(",")
        if len(cols) != 7:
            raise TagbootError(f"bad metrics CSV row: {line!r}")
        records.append(MetricsRecord(cols[0], int(cols[4]), int(cols[5]), int(cols[6])))
    return records
