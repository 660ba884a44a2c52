"""Full pipeline walkthrough: config-driven prepare/fit, artifact, HTTP API.

Synthesizes a small corpus with precomputed embeddings, runs the same
stages as `topicflux prepare` and `topicflux fit`, then queries the saved
artifact through the in-process HTTP app (the `serve` command runs the
identical app under uvicorn).
"""

import csv
import tempfile
from datetime import date, timedelta
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from topicflux import EmbeddingMatrix, load_model, save_embeddings
from topicflux.config import RunConfig
from topicflux.pipeline import run_fit, run_prepare
from topicflux.service import create_app

work = Path(tempfile.mkdtemp(prefix="topicflux-demo-"))
rng = np.random.default_rng(42)

# --- synthesize a 600-document corpus with 4 planted topics ---------------
TOPICS = ["ventilator", "vaccine", "telework", "variant"]
START, END = date(2020, 1, 1), date(2021, 12, 31)
span = (END - START).days
centers = rng.normal(0, 9, (4, 768))

rows, vectors = [], []
for i in range(600):
    topic = int(rng.integers(0, 4))
    kw = TOPICS[topic]
    words = " ".join(
        f"the {kw} of study and {kw} in results with {kw}{j} analysis" for j in range(4)
    )
    rows.append({
        "uid": f"d{i:04d}", "group": f"d{i:04d}",
        "title": f"On {kw} ({i})", "abstract": words,
        "published": (START + timedelta(days=int(rng.integers(0, span + 1)))).isoformat(),
        "doi": f"10.1/d{i:04d}", "lang": "en",
    })
    vectors.append(centers[topic] + rng.normal(0, 0.5, 768))

meta = work / "metadata.csv"
with open(meta, "w", newline="") as f:
    w = csv.DictWriter(f, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
emb = work / "embeddings.emb"
save_embeddings(EmbeddingMatrix([r["uid"] for r in rows], np.array(vectors, dtype=np.float32)), emb)
(work / "cases.csv").write_text(f"{START},1000\n{END},4000\n")
(work / "events.csv").write_text(f"{date(2021, 1, 1)},vaccines available\n")

(work / "config.toml").write_text(f"""
seed = 7
[corpus]
path = "{meta}"
format = "csv"
[corpus.schema]
record_id = "uid"
dup_group_key = "group"
title = "title"
abstract = "abstract"
publish_date = "published"
doi = "doi"
language = "lang"
[filter]
window = ["{START}", "{END}"]
[embeddings]
path = "{emb}"
[reduce]
k = 20
[cluster]
min_cluster_size = 50
min_samples = 10
[overlays]
cases = "{work / 'cases.csv'}"
events = "{work / 'events.csv'}"
""")

# --- prepare + fit (what the CLI subcommands call) -------------------------
config = RunConfig.load(work / "config.toml")
corpus = run_prepare(config, work / "prepared")
print("prepared:", len(corpus.records), "records;", dict(corpus.provenance))

model = run_fit(config, work / "prepared", emb, work / "model")
print("fitted:", model.n_topics, "topics over", model.n_documents, "documents")

# --- reload the artifact and serve it --------------------------------------
loaded = load_model(work / "model")
client = TestClient(create_app(loaded))

info = client.get("/api/v1/model").json()
print("\nGET /api/v1/model ->", {k: info[k] for k in ("documents", "topics", "vocabulary")})

hits = client.get("/api/v1/topics/search", params={"q": "vaccine", "n": 3}).json()
print("GET /topics/search?q=vaccine ->",
      [(h["topic_id"], round(h["similarity"], 2)) for h in hits["results"]])

best = hits["results"][0]["topic_id"]
series = client.get(f"/api/v1/topics/{best}/series", params={"bin_weeks": 4}).json()
print(f"GET /topics/{best}/series (4-week bins) -> {len(series['series'])} bins, "
      f"peak intensity {max(r['intensity'] for r in series['series']):.3f}")

verdict = client.post("/api/v1/tests", json={
    "topic_id": best,
    "window1": ["2020-01-01", "2020-12-31"],
    "window2": ["2021-01-01", "2021-12-31"],
    "bin_weeks": 4,
}).json()
print(f"POST /tests -> H={verdict['h']:.5f} p={verdict['p_value']:.5f} "
      f"significant={verdict['significant']}")

print(f"\nartifact on disk: {work / 'model'}")
print(f"serve it with: topicflux serve --model {work / 'model'} --bind 127.0.0.1:8000")
