import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import make_model
from wembed import store
from wembed.service import ApiConfig, create_app


@pytest.fixture
def client(tiny_model):
    return TestClient(create_app(tiny_model))


class TestMostSimilar:
    def test_schema_matches_store(self, tiny_model, client):
        response = client.get("/api/most-similar/Q1", params={"n": 3})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("application/json")
        body = response.json()
        hits = store.most_similar(tiny_model, "Q1", 3)
        assert body == {
            "query": "Q1",
            "n": 3,
            "most_similar": [
                {"item": str(h.entity), "similarity": round(h.score, 6)} for h in hits
            ],
        }

    def test_default_n(self, client):
        body = client.get("/api/most-similar/Q1").json()
        assert body["n"] == 10

    def test_scores_six_decimals(self, client):
        body = client.get("/api/most-similar/Q1").json()
        for hit in body["most_similar"]:
            # 6 decimal places max in the rendered number
            text = json.dumps(hit["similarity"])
            if "." in text and "e" not in text:
                assert len(text.split(".")[1]) <= 6

    def test_oov_404(self, client):
        response = client.get("/api/most-similar/Q404")
        assert response.status_code == 404
        assert response.json() == {"error": "not-in-vocabulary", "entity": "Q404"}

    def test_malformed_400(self, client):
        response = client.get("/api/most-similar/NOTANID")
        assert response.status_code == 400
        assert response.json()["error"] == "malformed-entity-id"

    def test_n_out_of_range_400(self, client):
        assert client.get("/api/most-similar/Q1", params={"n": 0}).status_code == 400
        assert client.get("/api/most-similar/Q1", params={"n": 101}).status_code == 400
        assert client.get("/api/most-similar/Q1", params={"n": "abc"}).status_code == 400

    def test_ordering_identical_to_store(self, tiny_model, client):
        body = client.get("/api/most-similar/Q2", params={"n": 4}).json()
        hits = store.most_similar(tiny_model, "Q2", 4)
        assert [h["item"] for h in body["most_similar"]] == [str(h.entity) for h in hits]

    def test_byte_stable(self, client):
        r1 = client.get("/api/most-similar/Q1", params={"n": 4})
        r2 = client.get("/api/most-similar/Q1", params={"n": 4})
        assert r1.content == r2.content


class TestSimilarity:
    def test_identity(self, client):
        body = client.get("/api/similarity/Q1/Q1").json()
        assert abs(body["similarity"] - 1.0) <= 1e-6
        assert body["entity1"] == "Q1" and body["entity2"] == "Q1"

    def test_symmetric(self, client):
        a = client.get("/api/similarity/Q1/Q3").json()["similarity"]
        b = client.get("/api/similarity/Q3/Q1").json()["similarity"]
        assert a == b

    def test_matches_store_to_six_decimals(self, tiny_model, client):
        body = client.get("/api/similarity/Q1/Q2").json()
        assert body["similarity"] == round(store.similarity(tiny_model, "Q1", "Q2"), 6)

    def test_oov_names_first_offender(self, client):
        response = client.get("/api/similarity/Q404/Q405")
        assert response.status_code == 404
        assert response.json()["entity"] == "Q404"

    def test_malformed_400(self, client):
        assert client.get("/api/similarity/xx/Q1").status_code == 400
        assert client.get("/api/similarity/Q1/0Q").status_code == 400


class TestVocab:
    def test_present(self, client):
        assert client.get("/api/vocab/Q1").json() == {"entity": "Q1", "in_vocabulary": True}

    def test_absent(self, client):
        assert client.get("/api/vocab/Q424242").json() == {
            "entity": "Q424242",
            "in_vocabulary": False,
        }

    def test_malformed(self, client):
        assert client.get("/api/vocab/nope").status_code == 400


class TestHealthz:
    def test_ok_when_loaded(self, client):
        assert client.get("/healthz").json() == {"status": "ok", "vocab_size": 5, "dim": 4}

    def test_repeated_calls_identical(self, client):
        assert client.get("/healthz").content == client.get("/healthz").content

    def test_503_before_model_load(self, tmp_path, tiny_model):
        path = tmp_path / "m.txt"
        store.save_text(tiny_model, path)
        app = create_app(config=ApiConfig(model_path=str(path)))
        # no lifespan startup: the model is still loading
        bare = TestClient(app)
        assert bare.get("/healthz").status_code == 503
        assert bare.get("/api/most-similar/Q1").status_code == 503
        # once started (context manager runs the lifespan) it serves
        with TestClient(app) as started:
            assert started.get("/healthz").json()["vocab_size"] == 5


class TestStaticUi:
    def test_api_works_without_bundle_and_root_hints(self, client):
        response = client.get("/")
        assert response.status_code == 404
        assert response.json()["error"] == "no-ui-bundle"
        assert client.get("/healthz").status_code == 200

    def test_serves_bundle_when_present(self, tiny_model, tmp_path):
        (tmp_path / "index.html").write_text("<!doctype html><title>wembed</title>")
        (tmp_path / "app.js").write_text("console.log('hi')")
        app = create_app(tiny_model, ApiConfig(static_dir=str(tmp_path)))
        c = TestClient(app)
        root = c.get("/")
        assert root.status_code == 200
        assert root.headers["content-type"].startswith("text/html")
        asset = c.get("/static/app.js")
        assert asset.status_code == 200

    def test_static_traversal_blocked(self, tiny_model, tmp_path):
        (tmp_path / "index.html").write_text("x")
        app = create_app(tiny_model, ApiConfig(static_dir=str(tmp_path)))
        c = TestClient(app)
        assert c.get("/static/../../etc/passwd").status_code == 404

    def test_unknown_path_is_json_404(self, client):
        response = client.get("/nope/nope")
        assert response.status_code == 404
        json.loads(response.content)


class TestConfigValidation:
    def test_k_default_bounds(self):
        with pytest.raises(ValueError):
            ApiConfig(k_default=0)
        with pytest.raises(ValueError):
            ApiConfig(k_default=200, k_max=100)


class TestAgainstRandomModel:
    def test_contract_on_wider_model(self):
        rs = np.random.RandomState(6)
        tokens = [f"Q{i}" for i in range(1, 101)] + [f"P{i}" for i in range(1, 11)]
        model = make_model(tokens, rs.randn(110, 12).astype(np.float32))
        c = TestClient(create_app(model))
        body = c.get("/api/most-similar/Q50", params={"n": 7}).json()
        hits = store.most_similar(model, "Q50", 7)
        assert [h["item"] for h in body["most_similar"]] == [str(h.entity) for h in hits]
        # properties are included in results (clients may filter)
        assert c.get("/api/vocab/P3").json()["in_vocabulary"] is True
