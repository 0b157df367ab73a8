"""HTTP front door for the annotation store.

Stdlib threading server, JSON bodies, four routes:

  GET  /api/tasks/next?annotator=<id>  200 task | 204 nothing left
  POST /api/judgments                  201 | 409 duplicate | 400 | 404
  GET  /api/progress                   totals and per-annotator counts
  GET  /api/pairs/<id>                 pair text with current vote counts

Durability contract: the store journals every accepted judgment before
submit() returns, so a 201 means the judgment is on disk. Anything outside
/api/ is served from an optional static directory (the annotation UI build).
"""

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlsplit

from .annotation import ACCEPTED, AnnotationStore

logger = logging.getLogger(__name__)

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json; charset=utf-8",
    ".ico": "image/x-icon",
}


class AnnotationServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        address: tuple[str, int],
        store: AnnotationStore,
        static_dir: Path | None = None,
    ):
        super().__init__(address, _Handler)
        self.store = store
        self.static_dir = Path(static_dir).resolve() if static_dir else None


class _Handler(BaseHTTPRequestHandler):
    server: AnnotationServer
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        logger.debug("%s %s", self.address_string(), format % args)

    def _send_json(self, status: int, obj: dict) -> None:
        body = json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_empty(self, status: int) -> None:
        self.send_response(status)
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        parts = urlsplit(self.path)
        path = parts.path
        if path == "/api/tasks/next":
            annotator = parse_qs(parts.query).get("annotator", [""])[0]
            if not annotator:
                self._send_json(400, {"error": "annotator query parameter required"})
                return
            task = self.server.store.next_task(annotator)
            if task is None:
                self._send_empty(204)
                return
            self._send_json(
                200,
                {"pair_id": task.id, "source": task.source, "candidate": task.candidate},
            )
        elif path == "/api/progress":
            self._send_json(200, self.server.store.progress())
        elif path.startswith("/api/pairs/"):
            pair_id = unquote(path[len("/api/pairs/") :])
            try:
                self._send_json(200, self.server.store.pair_info(pair_id))
            except KeyError:
                self._send_json(404, {"error": f"unknown pair {pair_id!r}"})
        elif not path.startswith("/api/"):
            self._serve_static(path)
        else:
            self._send_json(404, {"error": "no such route"})

    def do_POST(self) -> None:
        if urlsplit(self.path).path != "/api/judgments":
            self._send_json(404, {"error": "no such route"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            obj = json.loads(self.rfile.read(length).decode("utf-8"))
            if not isinstance(obj, dict):
                raise ValueError("body must be a JSON object")
        except (ValueError, UnicodeDecodeError) as exc:
            self._send_json(400, {"error": f"malformed body: {exc}"})
            return
        for key in ("pair_id", "annotator_id", "label"):
            if not isinstance(obj.get(key), str) or not obj[key]:
                self._send_json(400, {"error": f"missing or invalid field {key}"})
                return
        try:
            outcome = self.server.store.submit(
                obj["pair_id"], obj["annotator_id"], obj["label"]
            )
        except KeyError:
            self._send_json(404, {"error": f"unknown pair {obj['pair_id']!r}"})
            return
        except ValueError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        if outcome == ACCEPTED:
            self._send_json(201, {"status": "accepted"})
        else:
            self._send_json(409, {"status": "duplicate"})

    def _serve_static(self, path: str) -> None:
        root = self.server.static_dir
        if root is None:
            self._send_json(404, {"error": "no such route"})
            return
        rel = unquote(path).lstrip("/") or "index.html"
        target = (root / rel).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        body = target.read_bytes()
        self.send_response(200)
        content_type = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def serve(
    store: AnnotationStore,
    host: str = "127.0.0.1",
    port: int = 8321,
    static_dir: Path | None = None,
) -> AnnotationServer:
    """Bind and return the server; the caller drives serve_forever()."""
    return AnnotationServer((host, port), store, static_dir=static_dir)
