"""Plain-HTTP rewriting forward proxy.

Browsers that won't let an extension modify response bodies force the
script patcher into the network path, so this proxy buffers script
responses, runs them through scan_and_patch keyed by the request host, and
relays everything else byte-exactly. TLS interception is out of scope:
CONNECT gets a 501. Optionally the proxy can also answer resource-block
filter matches with a local 403, which is explicitly server-visible mode.

The signature set reloads atomically: in-flight requests keep the set they
started with, new requests pick up the new file.
"""

from __future__ import annotations

import http.client
import json
import logging
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlsplit

from .activeblock import Signature, parse_signatures, scan_and_patch
from .filters import FilterList, match_url, parse_filter_list

__all__ = ["ProxyConfig", "RewritingProxy", "serve_proxy", "is_script_response"]

log = logging.getLogger("adwar.proxy")

_HOP_BY_HOP = {
    "connection",
    "proxy-connection",
    "keep-alive",
    "te",
    "transfer-encoding",
    "upgrade",
    "trailers",
    "proxy-authenticate",
    "proxy-authorization",
}

_SCRIPT_CONTENT_TYPES = ("javascript", "ecmascript")


def is_script_response(content_type: str, path: str) -> bool:
    ct = (content_type or "").lower()
    if any(token in ct for token in _SCRIPT_CONTENT_TYPES):
        return True
    return not ct and path.split("?")[0].endswith(".js")


@dataclass
class ProxyConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 0  # 0 = pick a free port
    signatures_path: str | Path | None = None
    filters_path: str | Path | None = None
    block_resources: bool = False
    max_script_bytes: int = 4 * 1024 * 1024
    upstream_timeout: float = 10.0


class _SharedState:
    """Signature/filter sets swapped atomically under a lock; handlers grab
    a reference once per request."""

    def __init__(self, cfg: ProxyConfig):
        self.cfg = cfg
        self._lock = threading.Lock()
        self.signatures: list[Signature] = []
        self.filters: FilterList | None = None
        self._sig_mtime: float | None = None
        self.reload()

    def reload(self) -> None:
        sigs: list[Signature] = []
        mtime = None
        if self.cfg.signatures_path:
            p = Path(self.cfg.signatures_path)
            sigs = parse_signatures(p.read_text(encoding="utf-8"))
            mtime = p.stat().st_mtime
        filters = None
        if self.cfg.filters_path:
            text = Path(self.cfg.filters_path).read_text(encoding="utf-8")
            filters = parse_filter_list(text, str(self.cfg.filters_path))
        with self._lock:
            self.signatures = sigs
            self.filters = filters
            self._sig_mtime = mtime

    def maybe_reload(self) -> None:
        if not self.cfg.signatures_path:
            return
        try:
            mtime = Path(self.cfg.signatures_path).stat().st_mtime
        except OSError:
            return
        if self._sig_mtime is not None and mtime != self._sig_mtime:
            try:
                self.reload()
            except Exception as exc:
                log.warning("signature reload failed, keeping old set: %s", exc)

    def snapshot(self) -> tuple[list[Signature], FilterList | None]:
        with self._lock:
            return self.signatures, self.filters


class _ProxyHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: _SharedState  # injected by RewritingProxy

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s " + fmt, self.address_string(), *args)

    def do_CONNECT(self):
        self.send_error(501, "TLS interception not supported (plain HTTP only)")

    def do_GET(self):
        self._relay("GET")

    def do_HEAD(self):
        self._relay("HEAD")

    def do_POST(self):
        self._relay("POST")

    def _read_request_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _relay(self, method: str) -> None:
        self.state.maybe_reload()
        signatures, filters = self.state.snapshot()
        url = self.path
        parts = urlsplit(url)
        if parts.scheme != "http" or not parts.netloc:
            self.send_error(400, "proxy expects absolute http:// request URIs")
            return

        if filters is not None and self.state.cfg.block_resources:
            blocked, rule = match_url(filters, url)
            if blocked:
                body = f"blocked by filter rule: {rule.raw}\n".encode()
                self.send_response(403)
                self.send_header("Content-Type", "text/plain; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)
                return

        upstream_path = parts.path or "/"
        if parts.query:
            upstream_path += "?" + parts.query
        headers = {
            k: v for k, v in self.headers.items() if k.lower() not in _HOP_BY_HOP
        }
        headers["Host"] = parts.netloc
        headers["Accept-Encoding"] = "identity"  # keep bodies rewritable
        headers["Connection"] = "close"
        body = self._read_request_body()

        try:
            conn = http.client.HTTPConnection(
                parts.netloc, timeout=self.state.cfg.upstream_timeout
            )
            conn.request(method, upstream_path, body=body or None, headers=headers)
            resp = conn.getresponse()
            payload = resp.read()
            resp_headers = [
                (k, v) for k, v in resp.getheaders() if k.lower() not in _HOP_BY_HOP
            ]
            status = resp.status
            conn.close()
        except OSError as exc:
            self.send_error(502, f"upstream fetch failed: {exc}")
            return

        content_type = next(
            (v for k, v in resp_headers if k.lower() == "content-type"), ""
        )
        host = parts.hostname or ""
        if (
            method != "HEAD"
            and is_script_response(content_type, parts.path)
            and signatures
        ):
            if len(payload) > self.state.cfg.max_script_bytes:
                log.info(
                    "script %s%s over size cap (%d bytes), relayed unmodified",
                    host, parts.path, len(payload),
                )
            else:
                text = payload.decode("utf-8", errors="replace")
                result = scan_and_patch(text, host, signatures, script_id=parts.path)
                if result.modified or result.directives:
                    payload = result.rewritten.encode("utf-8")
                    log.info(
                        "%s",
                        json.dumps(
                            {
                                "host": host,
                                "path": parts.path,
                                "signatures": sorted(
                                    {a.sig_id for a in result.actions}
                                    | {d.sig_id for d in result.directives}
                                ),
                            },
                            sort_keys=True,
                        ),
                    )

        self.send_response(status)
        for k, v in resp_headers:
            if k.lower() == "content-length":
                continue
            self.send_header(k, v)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        if method != "HEAD":
            self.wfile.write(payload)


class RewritingProxy:
    """Running proxy service; use as a context manager or call shutdown()."""

    def __init__(self, cfg: ProxyConfig):
        self.cfg = cfg
        self.state = _SharedState(cfg)
        handler = type("BoundProxyHandler", (_ProxyHandler,), {"state": self.state})
        self.server = ThreadingHTTPServer((cfg.listen_host, cfg.listen_port), handler)
        self.server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self.server.server_address[:2]

    def start(self) -> "RewritingProxy":
        self._thread = threading.Thread(
            target=self.server.serve_forever, name="adwar-proxy", daemon=True
        )
        self._thread.start()
        return self

    def reload_signatures(self) -> None:
        self.state.reload()

    def serve_forever(self) -> None:
        self.server.serve_forever()

    def shutdown(self) -> None:
        self.server.shutdown()
        self.server.server_close()
        if self._thread:
            self._thread.join(timeout=5)

    def __enter__(self) -> "RewritingProxy":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.shutdown()


def serve_proxy(cfg: ProxyConfig) -> RewritingProxy:
    """Bind and start the proxy in a background thread; raises OSError if
    the port cannot be bound, SignatureError/FilterError on bad files."""
    return RewritingProxy(cfg).start()
