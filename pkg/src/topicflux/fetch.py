"""Generic paged-JSON corpus fetcher for building corpora from public APIs.

One GET per page against `base_url`, walking `page_param` upward until a
short or empty page arrives. The transport is injectable so tests (and
callers with their own HTTP stack) never touch the network.
"""

from __future__ import annotations

import json
import os
import urllib.parse
import urllib.request


class FetchError(Exception):
    pass


def _default_fetcher(url: str) -> bytes:
    with urllib.request.urlopen(url, timeout=60) as resp:  # nosec - caller-supplied URL
        return resp.read()


def fetch_corpus_pages(
    base_url: str,
    query: dict[str, str] | str | None = None,
    page_param: str = "page",
    page_size: int = 100,
    page_size_param: str = "page_size",
    api_key_env: str | None = None,
    api_key_param: str = "api_key",
    start_page: int = 1,
    max_pages: int = 10_000,
    fetcher=None,
) -> list[dict]:
    """Collect rows from a paged endpoint returning JSON arrays.

    A page smaller than `page_size` (or empty) ends the walk. A string
    `query` is shorthand for {"q": query}.
    """
    fetcher = fetcher or _default_fetcher
    params: dict[str, str] = {}
    if isinstance(query, str):
        params["q"] = query
    elif query:
        params.update({str(k): str(v) for k, v in query.items()})
    if api_key_env:
        key = os.environ.get(api_key_env)
        if not key:
            raise FetchError(f"environment variable {api_key_env} is not set")
        params[api_key_param] = key

    rows: list[dict] = []
    for page in range(start_page, start_page + max_pages):
        page_params = dict(params)
        page_params[page_param] = str(page)
        page_params[page_size_param] = str(page_size)
        url = f"{base_url}?{urllib.parse.urlencode(page_params)}"
        try:
            payload = fetcher(url)
        except OSError as exc:
            raise FetchError(f"fetch failed for {url}: {exc}") from exc
        try:
            batch = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise FetchError(f"page {page} is not valid JSON: {exc}") from exc
        if not isinstance(batch, list):
            raise FetchError(f"page {page} is not a JSON array")
        rows.extend(batch)
        if len(batch) < page_size:
            break
    return rows
