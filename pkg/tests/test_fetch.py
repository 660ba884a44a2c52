import json
from urllib.parse import parse_qs, urlparse

import pytest

from topicflux.fetch import FetchError, fetch_corpus_pages


def paged_backend(rows, expect_params=None):
    """Fake transport serving `rows` in page_size chunks."""
    calls = []

    def fetcher(url: str) -> bytes:
        calls.append(url)
        params = {k: v[0] for k, v in parse_qs(urlparse(url).query).items()}
        if expect_params:
            for key, value in expect_params.items():
                assert params.get(key) == value, f"{key} missing from {url}"
        page = int(params["page"])
        size = int(params["page_size"])
        start = (page - 1) * size
        return json.dumps(rows[start : start + size]).encode()

    return fetcher, calls


def test_fetch_walks_pages_until_short_page():
    rows = [{"id": i} for i in range(25)]
    fetcher, calls = paged_backend(rows)
    got = fetch_corpus_pages("http://x/api", query="climate", page_size=10, fetcher=fetcher)
    assert got == rows
    assert len(calls) == 3  # 10 + 10 + 5 (short page stops the walk)
    assert "q=climate" in calls[0]


def test_fetch_exact_multiple_makes_one_extra_call():
    rows = [{"id": i} for i in range(20)]
    fetcher, calls = paged_backend(rows)
    got = fetch_corpus_pages("http://x/api", page_size=10, fetcher=fetcher)
    assert got == rows
    assert len(calls) == 3  # final empty page terminates


def test_fetch_query_table_and_api_key(monkeypatch):
    monkeypatch.setenv("TEST_API_KEY", "sekrit")
    rows = [{"id": 1}]
    fetcher, calls = paged_backend(
        rows, expect_params={"subject": "Climate Change", "api_key": "sekrit"}
    )
    got = fetch_corpus_pages(
        "http://x/api",
        query={"subject": "Climate Change"},
        page_size=5,
        api_key_env="TEST_API_KEY",
        fetcher=fetcher,
    )
    assert got == rows


def test_fetch_missing_api_key_env(monkeypatch):
    monkeypatch.delenv("NOPE_KEY", raising=False)
    with pytest.raises(FetchError, match="NOPE_KEY"):
        fetch_corpus_pages("http://x/api", api_key_env="NOPE_KEY", fetcher=lambda u: b"[]")


def test_fetch_non_array_payload():
    with pytest.raises(FetchError, match="array"):
        fetch_corpus_pages("http://x/api", fetcher=lambda u: b'{"rows": []}')


def test_fetch_bad_json():
    with pytest.raises(FetchError, match="not valid JSON"):
        fetch_corpus_pages("http://x/api", fetcher=lambda u: b"<html>")
