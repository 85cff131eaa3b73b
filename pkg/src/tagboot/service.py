"""HTTP facade over a bootstrap project for human-in-the-loop correction.

The service owns a project directory: it serves the pending slice of tagger
output, accepts per-verse corrections into a gold store (one file per verse),
runs one bootstrap iteration on demand, and exposes the metrics history.

Every acknowledged write is already on disk, and all state is reconstructed
from the directory alone on restart. Mutations are serialized through a single
lock; the iteration commit point is the snapshot write, so a crash mid-iterate
rolls back to the previous iteration on reload.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .bootstrap import ProjectStore, Schedule, make_training_corpus, select_slice
from .config import load_config
from .corpus import (
    TaggedCorpus,
    Token,
    Verse,
    VerseId,
    parse_tagset,
    parse_vertical,
    serialize_vertical,
)
from .errors import BootstrapError, TagbootError
from .metrics import MetricsRecord, evaluate
from .tbl import DEFAULT_TEMPLATES, apply_rules, learn, parse_templates


class ServiceConflict(TagbootError):
    """Request is valid but clashes with current state (pending/busy/resubmit)."""


class ServiceBadRequest(TagbootError):
    """Request payload is malformed or references unknown data."""


@dataclass(frozen=True)
class _View:
    """Immutable published state; readers always see a complete iteration."""

    iteration: int
    snapshot: TaggedCorpus
    prev_snapshot: TaggedCorpus | None
    records: tuple[MetricsRecord, ...]
    slice_ids: tuple[VerseId, ...]
    corrected: frozenset[VerseId]

    @property
    def pending(self) -> tuple[VerseId, ...]:
        return tuple(vid for vid in self.slice_ids if vid not in self.corrected)


def _record_doc(record: MetricsRecord) -> dict:
    return {
        "state": record.label,
        "accuracy": record.accuracy,
        "error_rate": record.error_rate,
        "transformation_rate": record.transformation_rate,
        "token_total": record.token_total,
        "correct_count": record.correct_count,
        "in_target_count": record.in_target_tagset_count,
    }


class AnnotationProject:
    """State machine for the correction loop over one project directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.config = load_config(self.root)
        self.store = ProjectStore(self.root)
        self.schedule = Schedule(
            self.config.increment, self.config.iterations, self.config.seed
        )
        tagset_path = self.config.path(self.root, "target_tagset")
        self.tagset = parse_tagset(tagset_path.read_text(encoding="utf-8"), tagset_path.stem)
        if self.config.templates:
            self.templates = parse_templates(
                self.config.path(self.root, "templates").read_text(encoding="utf-8")
            )
        else:
            self.templates = DEFAULT_TEMPLATES
        self.theta = self.config.theta
        if 0 not in self.store.snapshot_iterations():
            raise BootstrapError(
                f"project {self.root} has no initial snapshot; run the project stage first"
            )
        self.initial0 = self.store.read_snapshot(0)
        self.all_ids = [v.id for v in self.initial0.verses]
        self.reference_gold = None
        if self.config.gold:
            self.reference_gold = parse_vertical(
                self.config.path(self.root, "gold").read_text(encoding="utf-8"), 1
            )
        self.gold_dir = self.root / "gold"
        self._lock = threading.Lock()
        self._view = self._load_view()

    # -- state reconstruction ------------------------------------------------

    def _gold_file(self, vid: VerseId) -> Path:
        return self.gold_dir / (str(vid).replace(":", "_") + ".cols")

    def _read_gold_store(self) -> dict[VerseId, Verse]:
        out: dict[VerseId, Verse] = {}
        if not self.gold_dir.is_dir():
            return out
        for path in sorted(self.gold_dir.iterdir()):
            if path.suffix != ".cols":
                continue
            corpus = parse_vertical(path.read_text(encoding="utf-8"), 1)
            for verse in corpus.verses:
                out[verse.id] = verse
        return out

    def _subset_record(self, snapshot: TaggedCorpus, gold_store: dict[VerseId, Verse], label: str) -> MetricsRecord:
        ids = [vid for vid in self.all_ids if vid in gold_store]
        snap_index = snapshot.index()
        predicted = TaggedCorpus(tuple(snap_index[vid] for vid in ids), 1)
        gold = TaggedCorpus(tuple(gold_store[vid] for vid in ids), 1)
        if not ids:
            return MetricsRecord(label, 0, 0, 0)
        return evaluate(predicted, gold, self.tagset, label)

    def _make_record(self, snapshot: TaggedCorpus, gold_store: dict[VerseId, Verse], label: str) -> MetricsRecord:
        if self.reference_gold is not None:
            return evaluate(snapshot, self.reference_gold, self.tagset, label)
        return self._subset_record(snapshot, gold_store, label)

    def _load_view(self) -> _View:
        iteration = max(self.store.snapshot_iterations())
        snapshot = self.store.read_snapshot(iteration)
        prev = self.store.read_snapshot(iteration - 1) if iteration >= 1 else None
        gold_store = self._read_gold_store()

        if self.store.metrics_path().is_file():
            records = self.store.read_metrics()
        else:
            records = []
        if len(records) < iteration + 1:
            # Fresh project: compute and persist the state-0 row.
            if iteration != 0 or records:
                raise BootstrapError(f"metrics.csv inconsistent with snapshots in {self.root}")
            records = [self._make_record(snapshot, gold_store, "IgbTC-0")]
            self.store.write_metrics(records)
        elif len(records) > iteration + 1:
            # An interrupted iteration wrote its metrics row before its
            # snapshot commit; drop the uncommitted tail.
            records = records[: iteration + 1]
            self.store.write_metrics(records)

        slice_ids: tuple[VerseId, ...] = ()
        if iteration < self.schedule.iterations:
            ids_path = self.store.gold_ids_path(iteration + 1)
            if ids_path.is_file():
                slice_ids = tuple(self.store.read_gold_ids(iteration + 1))
            else:
                prior = (
                    frozenset(self.store.read_gold_ids(iteration)) if iteration >= 1 else frozenset()
                )
                selected = select_slice(prior, iteration + 1, self.schedule, self.all_ids)
                self.store.write_gold_ids(iteration + 1, selected, self.all_ids)
                slice_ids = tuple(vid for vid in self.all_ids if vid in selected)
        return _View(
            iteration=iteration,
            snapshot=snapshot,
            prev_snapshot=prev,
            records=tuple(records),
            slice_ids=slice_ids,
            corrected=frozenset(vid for vid in gold_store if vid in set(slice_ids)),
        )

    # -- read operations -----------------------------------------------------

    def state_doc(self) -> dict:
        view = self._view
        return {
            "iteration": view.iteration,
            "verses_total": len(self.all_ids),
            "selected_count": len(view.slice_ids),
            "corrected_count": len(view.corrected),
            "pending_count": len(view.pending),
            "schedule_iterations": self.schedule.iterations,
            "tagset": self.tagset.name,
            "tagset_labels": self.tagset.labels(),
            "metrics": [_record_doc(r) for r in view.records],
        }

    def tagset_doc(self) -> dict:
        return {
            "name": self.tagset.name,
            "entries": [[label, description] for label, description in self.tagset.entries],
        }

    def slice_doc(self, iteration: int) -> dict:
        view = self._view
        if iteration != view.iteration + 1 or not view.slice_ids:
            raise ServiceBadRequest(
                f"no slice selected for iteration {iteration}; current iteration is {view.iteration}"
            )
        snap_index = view.snapshot.index()
        prev_index = view.prev_snapshot.index() if view.prev_snapshot is not None else None
        verses = []
        for vid in view.pending:
            verse = snap_index[vid]
            prev_verse = prev_index.get(vid) if prev_index is not None else None
            tokens = []
            for pos, tok in enumerate(verse.tokens):
                changed = prev_verse is not None and prev_verse.tokens[pos].tag != tok.tag
                tokens.append({"form": tok.form, "tag": tok.tag, "changed": changed})
            verses.append({"id": str(vid), "tokens": tokens})
        return {"iteration": iteration, "verses": verses}

    def metrics_csv(self) -> str:
        path = self.store.metrics_path()
        return path.read_text(encoding="utf-8") if path.is_file() else ""

    # -- mutations -------------------------------------------------------------

    def post_corrections(self, verse_id_text: str, corrections) -> dict:
        vid = VerseId.parse(verse_id_text)
        if not self._lock.acquire(timeout=10):
            raise ServiceConflict("another mutation is in progress")
        try:
            view = self._view
            if vid in view.corrected:
                raise ServiceConflict(f"verse {vid} was already corrected this iteration")
            if vid not in view.pending:
                raise ServiceConflict(f"verse {vid} is not pending in the current slice")
            verse = view.snapshot.index()[vid]
            bad_labels = sorted(
                {label for _, label in corrections if label not in self.tagset}
            )
            if bad_labels:
                raise ServiceBadRequest(
                    f"labels not in target tagset: {', '.join(bad_labels)}"
                )
            tags = [tok.tag for tok in verse.tokens]
            for index, label in corrections:
                if not isinstance(index, int) or not 0 <= index < len(tags):
                    raise ServiceBadRequest(f"token index {index} out of range for verse {vid}")
                tags[index] = label
            gold_verse = Verse(
                vid, tuple(Token(tok.form, tag) for tok, tag in zip(verse.tokens, tags))
            )
            self.gold_dir.mkdir(parents=True, exist_ok=True)
            content = serialize_vertical(TaggedCorpus((gold_verse,), 1))
            tmp = self._gold_file(vid).with_suffix(".tmp")
            tmp.write_text(content, encoding="utf-8")
            tmp.replace(self._gold_file(vid))
            self._view = _View(
                iteration=view.iteration,
                snapshot=view.snapshot,
                prev_snapshot=view.prev_snapshot,
                records=view.records,
                slice_ids=view.slice_ids,
                corrected=view.corrected | {vid},
            )
            return {
                "ok": True,
                "verse_id": str(vid),
                "pending_remaining": len(self._view.pending),
            }
        finally:
            self._lock.release()

    def post_iterate(self) -> dict:
        if not self._lock.acquire(blocking=False):
            raise ServiceConflict("an iteration is already running")
        try:
            view = self._view
            if view.iteration >= self.schedule.iterations:
                raise ServiceBadRequest(
                    f"schedule exhausted after {self.schedule.iterations} iterations"
                )
            pending = view.pending
            if pending:
                raise ServiceConflict(
                    "pending verses remain: " + ", ".join(str(v) for v in pending)
                )
            i = view.iteration + 1
            gold_store = self._read_gold_store()
            slice_set = set(view.slice_ids)
            gold_corpus = TaggedCorpus(
                tuple(gold_store[vid] for vid in view.slice_ids), 1
            )
            training = make_training_corpus(gold_corpus, self.initial0, slice_set)
            rules = learn(training, self.templates, self.theta)
            snapshot = apply_rules(rules, self.initial0)
            record = self._make_record(snapshot, gold_store, f"IgbTC-{i}")
            records = view.records + (record,)

            next_slice: tuple[VerseId, ...] = ()
            self.store.write_rules(i, rules)
            self.store.write_metrics(list(records))
            self.store.write_series(list(records))
            if i < self.schedule.iterations:
                selected = select_slice(slice_set, i + 1, self.schedule, self.all_ids)
                self.store.write_gold_ids(i + 1, selected, self.all_ids)
                next_slice = tuple(vid for vid in self.all_ids if vid in selected)
            self.store.write_gold_ids(i, slice_set, self.all_ids)
            # Snapshot write is the commit point; a crash before this line
            # reloads as iteration i-1 and the tail artifacts are rewritten.
            self.store.write_snapshot(i, snapshot)
            self._view = _View(
                iteration=i,
                snapshot=snapshot,
                prev_snapshot=view.snapshot,
                records=records,
                slice_ids=next_slice,
                corrected=frozenset(vid for vid in gold_store if vid in set(next_slice)),
            )
            return {"ok": True, "record": _record_doc(record)}
        finally:
            self._lock.release()


# ---------------------------------------------------------------------------
# HTTP layer


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}


def make_handler(project: AnnotationProject, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _send(self, status: int, body: bytes, content_type: str):
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def _send_json(self, status: int, doc: dict):
            self._send(status, json.dumps(doc, sort_keys=True).encode("utf-8"), "application/json")

        def _send_error_doc(self, status: int, message: str, **extra):
            self._send_json(status, {"error": message, **extra})

        def do_OPTIONS(self):
            self._send(204, b"", "text/plain")

        def do_GET(self):
            url = urlparse(self.path)
            try:
                if url.path == "/api/state":
                    self._send_json(200, project.state_doc())
                elif url.path == "/api/tagset":
                    self._send_json(200, project.tagset_doc())
                elif url.path == "/api/slice":
                    params = parse_qs(url.query)
                    if "iter" not in params or not re.match(r"^\d+$", params["iter"][0]):
                        self._send_error_doc(400, "slice requires ?iter=<n>")
                        return
                    self._send_json(200, project.slice_doc(int(params["iter"][0])))
                elif url.path == "/api/metrics.csv":
                    self._send(200, project.metrics_csv().encode("utf-8"), "text/csv; charset=utf-8")
                elif ui_dir is not None:
                    self._serve_static(url.path)
                else:
                    self._send_error_doc(404, f"unknown path {url.path}")
            except ServiceBadRequest as exc:
                self._send_error_doc(400, str(exc))
            except ServiceConflict as exc:
                self._send_error_doc(409, str(exc))
            except TagbootError as exc:
                self._send_error_doc(500, str(exc))

        def _serve_static(self, path: str):
            name = path.lstrip("/") or "index.html"
            full = (ui_dir / name).resolve()
            if not str(full).startswith(str(ui_dir.resolve())) or not full.is_file():
                self._send_error_doc(404, f"unknown path {path}")
                return
            ctype = _CONTENT_TYPES.get(full.suffix, "application/octet-stream")
            self._send(200, full.read_bytes(), ctype)

        def do_POST(self):
            url = urlparse(self.path)
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            try:
                payload = json.loads(raw.decode("utf-8")) if raw else {}
            except (ValueError, UnicodeDecodeError):
                self._send_error_doc(400, "request body must be JSON")
                return
            try:
                if url.path == "/api/corrections":
                    verse_id = payload.get("verse_id")
                    corrections = payload.get("corrections", [])
                    if not isinstance(verse_id, str) or not isinstance(corrections, list):
                        self._send_error_doc(400, "expected {verse_id, corrections:[[index,label],...]}")
                        return
                    pairs = []
                    for item in corrections:
                        if not (isinstance(item, list) and len(item) == 2):
                            self._send_error_doc(400, f"bad correction entry: {item!r}")
                            return
                        pairs.append((item[0], item[1]))
                    self._send_json(200, project.post_corrections(verse_id, pairs))
                elif url.path == "/api/iterate":
                    self._send_json(200, project.post_iterate())
                else:
                    self._send_error_doc(404, f"unknown path {url.path}")
            except ServiceBadRequest as exc:
                self._send_error_doc(400, str(exc))
            except ServiceConflict as exc:
                pending = [str(v) for v in project._view.pending]
                self._send_error_doc(409, str(exc), pending=pending)
            except TagbootError as exc:
                self._send_error_doc(500, str(exc))

    return Handler


def serve(project_root, addr: str = "127.0.0.1:8571", ui_dir=None) -> ThreadingHTTPServer:
    """Build the HTTP server (caller runs serve_forever)."""
    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise TagbootError(f"bad listen address {addr!r}; expected host:port")
    project = AnnotationProject(project_root)
    handler = make_handler(project, Path(ui_dir) if ui_dir else None)
    server = ThreadingHTTPServer((host, int(port_text)), handler)
    server.project = project
    return server
