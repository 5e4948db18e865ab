"""Click resolution: determine where activating an element actually leads.

Links can hide their destination behind redirect chains or recorded click
handlers, so the resolver starts from the nearest href (or a capture-time
target hint) and follows HTTP redirects through an injected fetch
capability until it lands somewhere. The caller is responsible for the
disclosure guard: only resolve a click on a candidate that already showed
another ad-disclosure marker, so the tool never blind-clicks ad creative.
"""

from __future__ import annotations

import http.client
from dataclasses import dataclass
from typing import Protocol
from urllib.parse import urljoin, urlsplit

from ..snapshot import PageSnapshot

__all__ = [
    "ClickError",
    "UnresolvableLinkError",
    "RedirectLoopError",
    "TransportError",
    "FetchResult",
    "Fetcher",
    "HttpFetcher",
    "LinkResolution",
    "resolve_click",
    "REDIRECT_LIMIT",
    "REDIRECT_STATUSES",
]

REDIRECT_LIMIT = 10
REDIRECT_STATUSES = (301, 302, 303, 307, 308)

# Capture harnesses record statically-discoverable click targets here when
# a node handles clicks in script instead of via href.
CLICK_TARGET_ATTR = "data-click-target"


class ClickError(Exception):
    pass


class UnresolvableLinkError(ClickError):
    """Node has neither an href chain nor a recorded click-target hint."""


class RedirectLoopError(ClickError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__(f"redirect loop: {' -> '.join(cycle)}")


class TransportError(ClickError):
    pass


@dataclass(frozen=True)
class FetchResult:
    status: int
    headers: dict[str, str]  # lowercased header names

    def location(self) -> str | None:
        return self.headers.get("location")


class Fetcher(Protocol):
    def fetch(self, url: str) -> FetchResult:
        ...


class HttpFetcher:
    """Plain HTTP/1.1 fetcher that does NOT follow redirects itself (the
    resolver needs to see every hop). Intended for loopback fixtures and
    desk-scale use."""

    def __init__(self, timeout: float = 5.0):
        self.timeout = timeout

    def fetch(self, url: str) -> FetchResult:
        parts = urlsplit(url)
        if parts.scheme not in ("http", "https"):
            raise TransportError(f"unsupported scheme in {url!r}")
        conn_cls = (
            http.client.HTTPSConnection if parts.scheme == "https"
            else http.client.HTTPConnection
        )
        path = parts.path or "/"
        if parts.query:
            path += "?" + parts.query
        try:
            conn = conn_cls(parts.netloc, timeout=self.timeout)
            try:
                conn.request("GET", path)
                resp = conn.getresponse()
                resp.read()
                headers = {k.lower(): v for k, v in resp.getheaders()}
                return FetchResult(status=resp.status, headers=headers)
            finally:
                conn.close()
        except OSError as exc:
            raise TransportError(f"fetch failed for {url!r}: {exc}") from exc


@dataclass(frozen=True)
class LinkResolution:
    start_node: int
    hops: tuple[str, ...]  # every URL fetched, in order
    final_url: str
    resolved_via: str  # "href" | "recorded-handler"

    @property
    def hop_count(self) -> int:
        return len(self.hops)


def _find_start(snap: PageSnapshot, frame_index: int, node_id: int) -> tuple[str, str]:
    """Nearest href walking up from the node, else a recorded click-target
    hint. Relative URLs resolve against the frame URL."""
    frame = snap.frames[frame_index]
    if node_id not in frame.nodes:
        raise KeyError(f"node {node_id} not in frame {frame_index}")
    chain = [node_id, *frame.ancestors(node_id)]
    for nid in chain:
        node = frame.node(nid)
        href = node.attr("href")
        if href:
            return urljoin(frame.url, href), "href"
    for nid in chain:
        node = frame.node(nid)
        hint = node.attr(CLICK_TARGET_ATTR)
        if hint and "click" in node.handlers:
            return urljoin(frame.url, hint), "recorded-handler"
    raise UnresolvableLinkError(
        f"node {node_id}: no href on self/ancestors and no recorded click target"
    )


def resolve_click(
    snap: PageSnapshot,
    node_id: int,
    fetcher: Fetcher,
    frame_index: int = 0,
    redirect_limit: int = REDIRECT_LIMIT,
) -> LinkResolution:
    """Simulate a click and return the destination URL with the full hop
    chain. Raises UnresolvableLinkError / RedirectLoopError / TransportError.
    """
    url, via = _find_start(snap, frame_index, node_id)
    hops: list[str] = []
    seen: set[str] = set()
    while True:
        if url in seen:
            raise RedirectLoopError([*hops, url])
        if len(hops) >= redirect_limit:
            raise RedirectLoopError(hops + [url])
        seen.add(url)
        hops.append(url)
        result = fetcher.fetch(url)
        if result.status in REDIRECT_STATUSES and result.location():
            url = urljoin(url, result.location())
            continue
        return LinkResolution(
            start_node=node_id,
            hops=tuple(hops),
            final_url=url,
            resolved_via=via,
        )
