"""Read-only static HTTP server for exported bundles and viewer assets.

Requests are resolved against an ordered list of root directories; the
first root containing the requested file wins. Only GET and HEAD are
accepted, single-part byte ranges are honoured, and nothing is ever
written, so concurrent clients always observe identical bytes.
"""

from __future__ import annotations

import posixpath
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import unquote, urlsplit

_CONTENT_TYPES = {
    ".css": "text/css; charset=utf-8",
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".txt": "text/plain; charset=utf-8",
    ".wasm": "application/wasm",
}
_DEFAULT_TYPE = "application/octet-stream"


def content_type_for(name) -> str:
    return _CONTENT_TYPES.get(Path(name).suffix.lower(), _DEFAULT_TYPE)


def resolve_path(roots, url_path: str) -> Path | None:
    """Map a request path to the first matching file under ``roots``.

    Returns None for misses and for anything that would escape a root
    (dot-dot segments, absolute tricks, symlinks pointing outside).
    """
    raw = unquote(urlsplit(url_path).path)
    clean = posixpath.normpath(raw.lstrip("/"))
    if clean in (".", ""):
        clean = "index.html"
    if clean.startswith(".."):
        return None
    for root in roots:
        base = Path(root).resolve()
        candidate = (base / clean).resolve()
        if not candidate.is_relative_to(base):
            continue
        if candidate.is_file():
            return candidate
    return None


class RangeNotSatisfiable(Exception):
    """Requested byte range lies entirely beyond the resource."""


def parse_range(header: str | None, size: int):
    """Decode a single-part ``bytes=`` range into inclusive (start, end).

    Malformed or multi-part headers yield None (caller serves the full
    body, as HTTP permits); a syntactically valid range that starts past
    the end of the resource raises :class:`RangeNotSatisfiable`.
    """
    if not header or not header.startswith("bytes="):
        return None
    spec = header[len("bytes="):].strip()
    if "," in spec:
        return None
    first, sep, last = spec.partition("-")
    if not sep:
        return None
    first, last = first.strip(), last.strip()
    try:
        if first:
            start = int(first)
            end = int(last) if last else size - 1
            if start < 0 or (last and end < start):
                return None
        elif last:
            suffix = int(last)  # bytes=-n means the final n bytes
            if suffix <= 0:
                raise RangeNotSatisfiable(header)
            start, end = max(size - suffix, 0), size - 1
        else:
            return None
    except ValueError:
        return None
    if start >= size:
        raise RangeNotSatisfiable(header)
    return start, min(end, size - 1)


class BundleRequestHandler(BaseHTTPRequestHandler):
    """Serves files from ``roots`` verbatim; subclassed with roots bound."""

    protocol_version = "HTTP/1.1"
    server_version = "snerg-serve"
    roots: tuple = ()

    def log_message(self, format, *args):  # noqa: A002 - base class signature
        pass

    def do_GET(self):
        self._respond(include_body=True)

    def do_HEAD(self):
        self._respond(include_body=False)

    def _reject_write(self):
        self.send_error(HTTPStatus.METHOD_NOT_ALLOWED, "server is read-only")

    do_POST = _reject_write
    do_PUT = _reject_write
    do_DELETE = _reject_write
    do_PATCH = _reject_write

    def _respond(self, include_body: bool):
        target = resolve_path(self.roots, self.path)
        if target is None:
            self.send_error(HTTPStatus.NOT_FOUND)
            return
        data = target.read_bytes()
        try:
            span = parse_range(self.headers.get("Range"), len(data))
        except RangeNotSatisfiable:
            self.send_response(HTTPStatus.REQUESTED_RANGE_NOT_SATISFIABLE)
            self.send_header("Content-Range", f"bytes */{len(data)}")
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        if span is None:
            body = data
            self.send_response(HTTPStatus.OK)
        else:
            start, end = span
            body = data[start : end + 1]
            self.send_response(HTTPStatus.PARTIAL_CONTENT)
            self.send_header("Content-Range", f"bytes {start}-{end}/{len(data)}")
        self.send_header("Content-Type", content_type_for(target))
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Accept-Ranges", "bytes")
        self.end_headers()
        if include_body:
            self.wfile.write(body)


def create_server(roots, port: int = 8000, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Build a threaded server over ``roots``; raises OSError on a busy port."""
    resolved = tuple(Path(r) for r in roots)
    handler = type("BoundHandler", (BundleRequestHandler,), {"roots": resolved})
    return ThreadingHTTPServer((host, port), handler)
