import json
import threading
import urllib.request

import pytest

from tagboot.cli import main
from tagboot.errors import BootstrapError
from tagboot.service import AnnotationProject, ServiceBadRequest, ServiceConflict, serve


def _make_project(root, verses=60, seed=3, iterations=3, increment=0.05):
    assert main(["synth", "--project", str(root), "--verses", str(verses),
                 "--seed", str(seed), "--iterations", str(iterations),
                 "--increment", str(increment)]) == 0
    assert main(["preprocess", "--project", str(root)]) == 0
    assert main(["project", "--project", str(root)]) == 0
    return root


@pytest.fixture()
def project(tmp_path):
    return AnnotationProject(_make_project(tmp_path / "proj"))


class TestStateAndSlice:
    def test_fresh_project_state(self, project):
        doc = project.state_doc()
        assert doc["iteration"] == 0
        assert doc["verses_total"] == 60
        assert len(doc["metrics"]) == 1
        assert doc["metrics"][0]["state"] == "IgbTC-0"
        assert doc["pending_count"] == doc["selected_count"] == 3
        assert doc["tagset_labels"]

    def test_unloaded_project_errors(self, tmp_path):
        from tagboot.errors import ConfigError

        with pytest.raises(ConfigError):
            AnnotationProject(tmp_path / "nowhere")

    def test_project_without_snapshot_errors(self, tmp_path):
        root = tmp_path / "p"
        assert main(["synth", "--project", str(root), "--verses", "10"]) == 0
        with pytest.raises(BootstrapError, match="initial snapshot"):
            AnnotationProject(root)

    def test_slice_serves_current_tags(self, project):
        doc = project.slice_doc(1)
        assert len(doc["verses"]) == 3
        snapshot = project._view.snapshot.index()
        for verse in doc["verses"]:
            from tagboot.corpus import VerseId

            tokens = snapshot[VerseId.parse(verse["id"])].tokens
            assert [t["tag"] for t in verse["tokens"]] == [t.tag for t in tokens]
            assert all(t["changed"] is False for t in verse["tokens"])

    def test_slice_wrong_iteration_rejected(self, project):
        with pytest.raises(ServiceBadRequest):
            project.slice_doc(2)

    def test_corrected_verse_leaves_slice(self, project):
        doc = project.slice_doc(1)
        vid = doc["verses"][0]["id"]
        project.post_corrections(vid, [])
        remaining = [v["id"] for v in project.slice_doc(1)["verses"]]
        assert vid not in remaining


class TestCorrections:
    def test_corrections_override_and_tacitly_accept(self, project):
        doc = project.slice_doc(1)
        verse = doc["verses"][0]
        ack = project.post_corrections(verse["id"], [(0, "NNC"), (1, "VrV")])
        assert ack["ok"] is True
        stored = project._read_gold_store()
        from tagboot.corpus import VerseId

        gold = stored[VerseId.parse(verse["id"])]
        assert gold.tokens[0].tag == "NNC"
        assert gold.tokens[1].tag == "VrV"
        for pos in range(2, len(gold.tokens)):
            assert gold.tokens[pos].tag == verse["tokens"][pos]["tag"]

    def test_unknown_label_rejected_nothing_persisted(self, project):
        doc = project.slice_doc(1)
        vid = doc["verses"][0]["id"]
        with pytest.raises(ServiceBadRequest, match="XYZ"):
            project.post_corrections(vid, [(0, "XYZ")])
        assert project._read_gold_store() == {}
        assert vid in [v["id"] for v in project.slice_doc(1)["verses"]]

    def test_resubmission_conflicts(self, project):
        vid = project.slice_doc(1)["verses"][0]["id"]
        project.post_corrections(vid, [])
        with pytest.raises(ServiceConflict):
            project.post_corrections(vid, [(0, "NNC")])

    def test_unselected_verse_conflicts(self, project):
        pending = {v["id"] for v in project.slice_doc(1)["verses"]}
        other = next(str(v) for v in project.all_ids if str(v) not in pending)
        with pytest.raises(ServiceConflict):
            project.post_corrections(other, [])

    def test_index_out_of_range_rejected(self, project):
        vid = project.slice_doc(1)["verses"][0]["id"]
        with pytest.raises(ServiceBadRequest, match="out of range"):
            project.post_corrections(vid, [(999, "NNC")])


class TestIterate:
    def _correct_all(self, project):
        for verse in project.slice_doc(project._view.iteration + 1)["verses"]:
            project.post_corrections(verse["id"], [])

    def test_iterate_grows_metrics(self, project):
        self._correct_all(project)
        out = project.post_iterate()
        assert out["ok"] is True
        assert out["record"]["state"] == "IgbTC-1"
        doc = project.state_doc()
        assert doc["iteration"] == 1
        assert len(doc["metrics"]) == 2

    def test_iterate_with_pending_names_verses(self, project):
        pending = [v["id"] for v in project.slice_doc(1)["verses"]]
        project.post_corrections(pending[0], [])
        with pytest.raises(ServiceConflict) as exc_info:
            project.post_iterate()
        for vid in pending[1:]:
            assert vid in str(exc_info.value)

    def test_changed_flags_after_iterate(self, project):
        self._correct_all(project)
        project.post_iterate()
        doc = project.slice_doc(2)
        prev = project._view.prev_snapshot.index()
        cur = project._view.snapshot.index()
        from tagboot.corpus import VerseId

        for verse in doc["verses"]:
            vid = VerseId.parse(verse["id"])
            for pos, tok in enumerate(verse["tokens"]):
                expected = prev[vid].tokens[pos].tag != cur[vid].tokens[pos].tag
                assert tok["changed"] == expected

    def test_restart_reconstructs_identical_state(self, project):
        self._correct_all(project)
        project.post_iterate()
        vid = project.slice_doc(2)["verses"][0]["id"]
        project.post_corrections(vid, [(0, "NNC")])
        reloaded = AnnotationProject(project.root)
        assert reloaded.state_doc() == project.state_doc()
        assert reloaded.slice_doc(2) == project.slice_doc(2)
        assert reloaded.metrics_csv() == project.metrics_csv()

    def test_schedule_exhaustion(self, tmp_path):
        project = AnnotationProject(
            _make_project(tmp_path / "p", verses=20, iterations=1, increment=0.1)
        )
        self._correct_all(project)
        project.post_iterate()
        with pytest.raises(ServiceBadRequest, match="exhausted"):
            project.post_iterate()

    def test_metrics_use_reference_gold_when_configured(self, project):
        # synth projects carry gold.cols; the state-0 row covers the full corpus
        record = project.state_doc()["metrics"][0]
        assert record["token_total"] == project.initial0.token_count()


class TestHttp:
    @pytest.fixture()
    def server(self, tmp_path):
        root = _make_project(tmp_path / "proj")
        server = serve(root, "127.0.0.1:0")
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        yield server
        server.shutdown()
        server.server_close()

    def _request(self, server, method, path, payload=None):
        port = server.server_address[1]
        url = f"http://127.0.0.1:{port}{path}"
        data = json.dumps(payload).encode() if payload is not None else None
        req = urllib.request.Request(url, data=data, method=method)
        if data:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, resp.read()
        except urllib.error.HTTPError as err:
            return err.code, err.read()

    def test_full_session(self, server):
        status, body = self._request(server, "GET", "/api/state")
        assert status == 200
        state = json.loads(body)
        assert state["iteration"] == 0

        status, body = self._request(server, "GET", "/api/tagset")
        assert status == 200
        tagset = json.loads(body)
        assert [e[0] for e in tagset["entries"]]

        status, body = self._request(server, "GET", "/api/slice?iter=1")
        slice_doc = json.loads(body)
        assert status == 200 and slice_doc["verses"]

        # iterate while verses are pending -> 409 naming them
        status, body = self._request(server, "POST", "/api/iterate", {})
        assert status == 409
        error = json.loads(body)
        assert error["pending"]

        for verse in slice_doc["verses"]:
            status, body = self._request(
                server, "POST", "/api/corrections",
                {"verse_id": verse["id"], "corrections": [[0, "NNC"]]},
            )
            assert status == 200, body

        status, body = self._request(server, "POST", "/api/iterate", {})
        assert status == 200, body
        assert json.loads(body)["record"]["state"] == "IgbTC-1"

        status, body = self._request(server, "GET", "/api/metrics.csv")
        assert status == 200
        csv_text = body.decode()
        assert csv_text == (server.project.root / "metrics.csv").read_text(encoding="utf-8")
        assert csv_text.count("\n") == 3  # header + 2 states

    def test_bad_routes_and_payloads(self, server):
        assert self._request(server, "GET", "/api/nope")[0] == 404
        assert self._request(server, "GET", "/api/slice")[0] == 400
        status, _ = self._request(server, "POST", "/api/corrections", {"verse_id": 5})
        assert status == 400

    def test_conflict_reported_as_409(self, server):
        _, body = self._request(server, "GET", "/api/slice?iter=1")
        vid = json.loads(body)["verses"][0]["id"]
        assert self._request(server, "POST", "/api/corrections",
                             {"verse_id": vid, "corrections": []})[0] == 200
        status, body = self._request(server, "POST", "/api/corrections",
                                     {"verse_id": vid, "corrections": []})
        assert status == 409
