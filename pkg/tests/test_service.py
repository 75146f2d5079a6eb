import json
import os

import pytest
from fastapi.testclient import TestClient

from prosegraph.backends import FixtureBackend
from prosegraph.decomposition import ComplexityRule
from prosegraph.model import validate_document
from prosegraph.service import (
    BundleStore,
    DocumentBundle,
    IngestConfig,
    IngestError,
    create_app,
    export_svg,
    ingest,
)


class TestIngest:
    def test_empty_text_rejected(self, climate_config, climate_backend):
        with pytest.raises(ValueError):
            ingest("   \n ", climate_config, climate_backend)

    def test_one_sentence_bundle(self, climate_config):
        backend = FixtureBackend.from_bundled("climate_fixtures.json")
        text = "Deforestation contributes to the rise of carbon dioxide in the atmosphere."
        bundle = ingest(text, climate_config, backend)
        assert len(bundle.timeline.blocks) == 1
        kinds = {e.kind for e in bundle.timeline.blocks[0].events}
        assert "dim_existing" not in kinds
        assert "node_split" not in kinds

    def test_climate_document_is_valid_and_deterministic(self, climate_bundle,
                                                         climate_text, climate_config):
        assert validate_document(climate_bundle.document).ok
        again = ingest(climate_text, climate_config,
                       FixtureBackend.from_bundled("climate_fixtures.json"))
        assert again.to_json() == climate_bundle.to_json()

    def test_missing_fixture_aborts_with_sentence_index(self, climate_config):
        backend = FixtureBackend({})
        with pytest.raises(IngestError) as err:
            ingest("Nothing matches this.", climate_config, backend)
        assert err.value.sentence_index == 0

    def test_provenance_records_fixture_keys(self, climate_bundle):
        assert climate_bundle.provenance["backend_mode"] == "fixture"
        assert climate_bundle.provenance["fixture_keys"]

    def test_pipeline_pins_shared_nodes_per_sentence(self, climate_bundle):
        # carbon dioxide is reused by sentences 2-5, so each of those layouts
        # pins it into the new sentence's region
        for idx in (1, 2, 3, 4):
            record = climate_bundle.states[idx]
            assert record.nodes["n-carbon-dioxide"]["pinned"]


class TestBundleStore:
    def test_save_load_round_trip(self, tmp_path, climate_bundle):
        store = BundleStore(str(tmp_path))
        path = store.save(climate_bundle)
        assert os.path.basename(path) == f"{climate_bundle.id}.json"
        loaded = store.load(climate_bundle.id)
        assert loaded.to_json() == climate_bundle.to_json()

    def test_no_partial_files(self, tmp_path, climate_bundle):
        store = BundleStore(str(tmp_path))
        store.save(climate_bundle)
        leftovers = [p for p in os.listdir(tmp_path) if p.endswith(".tmp")]
        assert leftovers == []
        for name in os.listdir(tmp_path):
            with open(tmp_path / name, encoding="utf-8") as f:
                json.load(f)  # every present file parses completely

    def test_ids_listing(self, tmp_path, climate_bundle):
        store = BundleStore(str(tmp_path))
        assert store.ids() == []
        store.save(climate_bundle)
        assert store.ids() == [climate_bundle.id]


@pytest.fixture()
def client(tmp_path, climate_config, climate_text):
    store = BundleStore(str(tmp_path))
    app = create_app(
        store, climate_config,
        backend_factory=lambda: FixtureBackend.from_bundled("climate_fixtures.json"),
    )
    return TestClient(app)


class TestHttpApi:
    def test_unknown_document_404(self, client):
        resp = client.get("/documents/doc-nope")
        assert resp.status_code == 404
        assert "doc-nope" in resp.json()["detail"]

    def test_post_then_timeline_blocks_match_sentences(self, client, climate_text):
        resp = client.post("/documents", content=climate_text)
        assert resp.status_code == 200
        doc_id = resp.json()["id"]
        tl = client.get(f"/documents/{doc_id}/timeline").json()
        doc = client.get(f"/documents/{doc_id}").json()
        assert len(tl["blocks"]) == len(doc["sentences"]) == 6

    def test_entities_sorted_by_descending_score(self, client, climate_text):
        doc_id = client.post("/documents", content=climate_text).json()["id"]
        ranks = client.get(f"/documents/{doc_id}/entities").json()
        scores = [r["score"] for r in ranks]
        assert scores == sorted(scores, reverse=True)
        assert ranks[0]["node_id"] == "n-carbon-dioxide"

    def test_neighborhood_endpoint(self, client, climate_text):
        doc_id = client.post("/documents", content=climate_text).json()["id"]
        hood = client.get(f"/documents/{doc_id}/neighborhood/n-carbon-dioxide").json()
        assert "n-carbon-dioxide" in hood["nodes"]
        assert hood["edges"]
        missing = client.get(f"/documents/{doc_id}/neighborhood/n-ghost")
        assert missing.status_code == 404

    def test_span_endpoint_resolves_innermost(self, client, climate_text):
        doc_id = client.post("/documents", content=climate_text).json()["id"]
        resp = client.get(f"/documents/{doc_id}/span",
                          params={"sentence": "s0", "offset": 45})
        assert resp.json()["node"] == "n-carbon-dioxide"
        miss = client.get(f"/documents/{doc_id}/span",
                          params={"sentence": "s0", "offset": 14})
        assert miss.json()["node"] is None

    def test_svg_endpoint(self, client, climate_text):
        doc_id = client.post("/documents", content=climate_text).json()["id"]
        resp = client.get(f"/documents/{doc_id}/svg", params={"prefix": 2})
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("image/svg+xml")
        assert resp.text.startswith("<?xml")
        bad = client.get(f"/documents/{doc_id}/svg", params={"prefix": 99})
        assert bad.status_code == 400

    def test_empty_post_rejected(self, client):
        assert client.post("/documents", content="  ").status_code == 400


class TestRemoteBackend:
    def test_posts_instruction_and_parses_response(self, monkeypatch):
        from prosegraph.backends import RemoteBackend

        calls = {}

        class FakeResponse:
            status_code = 200

            @staticmethod
            def json():
                return {"entities": [{"key": "e1", "label": "water"}], "relations": []}

        class FakeSession:
            def post(self, url, json=None, headers=None, timeout=None):
                calls["url"] = url
                calls["body"] = json
                calls["headers"] = headers
                return FakeResponse()

        backend = RemoteBackend(url="http://backend.test/extract", token="secret",
                                session=FakeSession())
        payload = backend.extract("Water flows.", "top_level.v1")
        assert payload["entities"][0]["label"] == "water"
        assert calls["url"] == "http://backend.test/extract"
        assert "Water flows." in calls["body"]["instruction"]
        assert calls["headers"]["Authorization"] == "Bearer secret"

    def test_missing_url_raises(self, monkeypatch):
        from prosegraph.backends import BackendError, RemoteBackend

        monkeypatch.delenv("PROSEGRAPH_BACKEND_URL", raising=False)
        with pytest.raises(BackendError):
            RemoteBackend()


class TestCli:
    def test_ingest_svg_entities_timeline(self, tmp_path, climate_text):
        from click.testing import CliRunner

        from prosegraph.cli import main

        passage = tmp_path / "passage.txt"
        passage.write_text(climate_text)
        fixtures = "src/prosegraph/data/climate_fixtures.json"
        runner = CliRunner()
        data_dir = str(tmp_path / "data")

        result = runner.invoke(main, [
            "ingest", str(passage), "--backend", "fixture", "--fixtures", fixtures,
            "--data-dir", data_dir, "--no-complexity",
        ])
        assert result.exit_code == 0, result.output
        doc_id = result.output.strip()

        svg = runner.invoke(main, ["svg", doc_id, "--prefix", "2", "--data-dir", data_dir])
        assert svg.exit_code == 0 and svg.output.startswith("<?xml")

        entities = runner.invoke(main, ["entities", doc_id, "--data-dir", data_dir])
        assert entities.exit_code == 0
        assert entities.output.splitlines()[0].split()[1] == "n-carbon-dioxide"

        tl = runner.invoke(main, ["timeline", doc_id, "--data-dir", data_dir])
        assert tl.exit_code == 0
        assert json.loads(tl.output)["document_id"] == doc_id

    def test_score_command_prints_table_numbers(self):
        from click.testing import CliRunner

        from prosegraph.cli import main

        runner = CliRunner()
        result = runner.invoke(main, [
            "score",
            "--gold", "src/prosegraph/data/score_gold.json",
            "--pred", "src/prosegraph/data/score_pred.json",
        ])
        assert result.exit_code == 0, result.output
        assert "93.1/95.1/94.1" in result.output
        assert "88.9/83.8/86.3" in result.output
