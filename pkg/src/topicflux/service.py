"""Read-only JSON API over a loaded model: the dashboard's entire contract.

The model is immutable after load, handlers share it without locking, and
every error surfaces as one machine code under a stable JSON shape:
{"error": {"code": ..., "message": ...}}.
"""

from __future__ import annotations

from datetime import date

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .dynamics import BIN_WIDTHS, series_for_topics
from .persistence import TopicModel
from .represent import RepresentError, search_topics, top_terms
from .stats import DEFAULT_ALPHA, DegenerateTiesError, WindowTooNarrowError, test_topic_windows

MAX_SEARCH_RESULTS = 20
CARD_TERMS = 50  # terms per topic shipped for word-cloud rendering


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _parse_date(value: str, name: str) -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise ApiError(400, "bad_date", f"{name} must be an ISO date, got {value!r}")


def _check_topic(model: TopicModel, topic_id: int) -> None:
    if not 0 <= topic_id < model.n_topics:
        raise ApiError(404, "topic_not_found", f"no topic with id {topic_id}")


def create_app(model: TopicModel, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="topicflux", docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=cors_origins,
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/v1/model")
    def model_info():
        return {
            "documents": model.n_documents,
            "topics": model.n_topics,
            "vocabulary": model.vocabulary_size,
            "window": [model.window[0].isoformat(), model.window[1].isoformat()],
            "bin_widths": sorted(model.series.keys()),
            "topic_sizes": [int(s) for s in model.tfidf.class_sizes],
            "config_hash": model.config_hash,
        }

    @app.get("/api/v1/topics/search")
    def topics_search(q: str = Query(default=""), n: int = Query(default=6)):
        if not q.strip():
            raise ApiError(400, "no_searchable_terms", "query is empty")
        n = max(1, min(n, MAX_SEARCH_RESULTS))
        try:
            result = search_topics(model.tfidf, q, n=n, card_terms=CARD_TERMS)
        except RepresentError as exc:
            raise ApiError(400, "no_searchable_terms", str(exc))
        return {
            "status": result.status,
            "results": [
                {
                    "topic_id": card.topic_id,
                    "size": card.size,
                    "similarity": card.similarity,
                    "terms": [{"term": t, "weight": w} for t, w in card.top_terms],
                }
                for card in result.cards
            ],
        }

    @app.post("/api/v1/topics/search")
    async def topics_search_by_vector(request: Request):
        """Embedding-space search: rank topics by cosine to their centroids."""
        if model.topic_centroids is None:
            raise ApiError(400, "embedding_search_unavailable", "model has no topic centroids")
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "bad_request", "body must be JSON")
        vector = body.get("embedding") if isinstance(body, dict) else None
        if not isinstance(vector, list) or not vector:
            raise ApiError(400, "bad_request", "embedding must be a non-empty array")
        centroids = model.topic_centroids
        if len(vector) != centroids.shape[1]:
            raise ApiError(
                400,
                "bad_request",
                f"embedding has {len(vector)} dims, model expects {centroids.shape[1]}",
            )
        import numpy as np

        q = np.asarray(vector, dtype=np.float64)
        norm = float(np.linalg.norm(q))
        if norm == 0.0 or not np.isfinite(q).all():
            raise ApiError(400, "bad_request", "embedding must be finite and non-zero")
        c_norms = np.linalg.norm(centroids, axis=1)
        c_norms[c_norms == 0] = 1.0
        sims = (centroids @ q) / (c_norms * norm)
        n = max(1, min(int(body.get("n", 6)), MAX_SEARCH_RESULTS))
        order = sorted(range(model.n_topics), key=lambda t: (-sims[t], t))[:n]
        return {
            "status": "ok",
            "results": [
                {
                    "topic_id": t,
                    "size": int(model.tfidf.class_sizes[t]),
                    "similarity": float(max(0.0, min(1.0, sims[t]))),
                    "terms": [
                        {"term": term, "weight": w}
                        for term, w in top_terms(model.tfidf, t, CARD_TERMS)
                    ],
                }
                for t in order
            ],
        }

    @app.get("/api/v1/topics/{topic_id}/series")
    def topic_series(
        topic_id: int,
        bin_weeks: int = Query(default=2),
        from_date: str | None = Query(default=None, alias="from"),
        to_date: str | None = Query(default=None, alias="to"),
    ):
        if bin_weeks not in BIN_WIDTHS or bin_weeks not in model.series:
            raise ApiError(400, "invalid_bin_width", f"bin_weeks must be one of {sorted(model.series)}")
        _check_topic(model, topic_id)
        ts = model.series[bin_weeks]
        lo = _parse_date(from_date, "from") if from_date else model.window[0]
        hi = _parse_date(to_date, "to") if to_date else model.window[1]
        triples = series_for_topics(ts, [topic_id], (lo, hi))[topic_id]
        return {
            "topic_id": topic_id,
            "bin_weeks": bin_weeks,
            "from": lo.isoformat(),
            "to": hi.isoformat(),
            "series": [
                {"bin_start": d.isoformat(), "intensity": inten, "count": cnt}
                for d, inten, cnt in triples
            ],
            "overlays": _overlay_slice(model, lo, hi),
        }

    @app.get("/api/v1/overlays")
    def overlays():
        return {
            "case_counts": [
                {"date": d.isoformat(), "value": v} for d, v in model.overlays.case_counts
            ],
            "events": [{"date": d.isoformat(), "label": l} for d, l in model.overlays.events],
        }

    @app.post("/api/v1/tests")
    async def run_test(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise ApiError(400, "bad_request", "body must be JSON")
        if not isinstance(body, dict):
            raise ApiError(400, "bad_request", "body must be a JSON object")
        for key in ("topic_id", "window1", "window2"):
            if key not in body:
                raise ApiError(400, "bad_request", f"missing field: {key}")
        try:
            topic_id = int(body["topic_id"])
        except (TypeError, ValueError):
            raise ApiError(400, "bad_request", "topic_id must be an integer")
        bin_weeks = body.get("bin_weeks", 2)
        if bin_weeks not in BIN_WIDTHS or bin_weeks not in model.series:
            raise ApiError(400, "invalid_bin_width", f"bin_weeks must be one of {sorted(model.series)}")
        alpha = body.get("alpha", DEFAULT_ALPHA)
        try:
            alpha = float(alpha)
        except (TypeError, ValueError):
            raise ApiError(400, "bad_request", "alpha must be a number")
        if not 0.0 < alpha < 1.0:
            raise ApiError(400, "bad_request", "alpha must be in (0, 1)")
        windows = []
        for name in ("window1", "window2"):
            value = body[name]
            if not isinstance(value, list) or len(value) != 2:
                raise ApiError(400, "bad_request", f"{name} must be [start, end]")
            windows.append((_parse_date(str(value[0]), name), _parse_date(str(value[1]), name)))
        _check_topic(model, topic_id)

        try:
            result = test_topic_windows(
                model.series[bin_weeks], topic_id, windows[0], windows[1], alpha
            )
        except WindowTooNarrowError as exc:
            raise ApiError(422, "window_too_narrow", str(exc))
        except DegenerateTiesError as exc:
            raise ApiError(422, "degenerate_ties", str(exc))
        return {
            "topic_id": topic_id,
            "bin_weeks": bin_weeks,
            "window1": [windows[0][0].isoformat(), windows[0][1].isoformat()],
            "window2": [windows[1][0].isoformat(), windows[1][1].isoformat()],
            "alpha": alpha,
            "h": result.h,
            "df": result.df,
            "p_value": result.p_value,
            "significant": result.significant,
            "group_sizes": result.group_sizes,
            "rank_sums": result.rank_sums,
            "windows_overlap": result.windows_overlap,
        }

    @app.get("/api/v1/topics/{topic_id}/terms")
    def topic_terms(topic_id: int, n: int = Query(default=CARD_TERMS)):
        _check_topic(model, topic_id)
        n = max(1, min(n, 200))
        return {
            "topic_id": topic_id,
            "size": int(model.tfidf.class_sizes[topic_id]),
            "terms": [{"term": t, "weight": w} for t, w in top_terms(model.tfidf, topic_id, n)],
        }

    return app


def _overlay_slice(model: TopicModel, lo: date, hi: date) -> dict:
    return {
        "case_counts": [
            {"date": d.isoformat(), "value": v}
            for d, v in model.overlays.case_counts
            if lo <= d <= hi
        ],
        "events": [
            {"date": d.isoformat(), "label": l}
            for d, l in model.overlays.events
            if lo <= d <= hi
        ],
    }
