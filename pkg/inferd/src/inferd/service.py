"""HTTP face of the sidecar: the softclf wire contract over one model.

POST /classify with ``{"text": ...}`` answers ``{"label", "score"}``;
GET /health reports the model id and readiness. Errors are JSON bodies
with an ``error`` field: 400 for unusable input, 413 for oversize
payloads, 500 when the model itself fails. One process serves one
checkpoint; model access is serialized behind a lock while connections
are handled concurrently up to a fixed limit.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .models import Classifier, ModelSpec, load_classifier, validate_classification

DEFAULT_BIND = "127.0.0.1:8080"
DEFAULT_MAX_BODY = 1_048_576
DEFAULT_MAX_CONNECTIONS = 8


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 (http.server naming)
        if self.path != "/health":
            self._send(404, {"error": f"no such path: {self.path}"})
            return
        self._send(200, {"model": self.server.model_id, "ready": True})

    def do_POST(self) -> None:  # noqa: N802
        if self.path != "/classify":
            self._send(404, {"error": f"no such path: {self.path}"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > self.server.max_body:
            # The body stays unread, so the connection cannot be reused.
            self.close_connection = True
            self._send(413, {"error": f"body exceeds {self.server.max_body} bytes"})
            return
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw)
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send(400, {"error": "body must be a JSON object"})
            return
        text = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(text, str) or not text.strip():
            self._send(400, {"error": "text must be a non-empty string"})
            return
        try:
            with self.server.model_lock:
                result = validate_classification(self.server.classifier(text))
        except Exception as exc:  # surface model failures as diagnostics
            self._send(500, {"error": f"classification failed: {exc}"})
            return
        self._send(200, result)

    def log_message(self, format: str, *args) -> None:
        pass  # keep stdio clean; the manifest of record is the response


class InferenceServer(ThreadingHTTPServer):
    """One-model HTTP server with a bounded connection pool."""

    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        classifier: Classifier,
        model_id: str,
        max_body: int = DEFAULT_MAX_BODY,
        max_connections: int = DEFAULT_MAX_CONNECTIONS,
    ):
        super().__init__(address, _Handler)
        self.classifier = classifier
        self.model_id = model_id
        self.max_body = max_body
        self.model_lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(max_connections)

    def process_request(self, request, client_address) -> None:
        self._slots.acquire()  # excess connections wait in the listen queue
        super().process_request(request, client_address)

    def process_request_thread(self, request, client_address) -> None:
        try:
            super().process_request_thread(request, client_address)
        finally:
            self._slots.release()

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port = bind.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {bind!r}")
    return host, int(port)


def create_server(
    classifier: Classifier,
    model_id: str,
    bind: str = DEFAULT_BIND,
    max_body: int = DEFAULT_MAX_BODY,
    max_connections: int = DEFAULT_MAX_CONNECTIONS,
) -> InferenceServer:
    return InferenceServer(parse_bind(bind), classifier, model_id, max_body, max_connections)


def serve(spec: ModelSpec, bind: str = DEFAULT_BIND, max_body: int = DEFAULT_MAX_BODY) -> None:
    """Load the checkpoint, then bind and serve until interrupted.

    Loading comes first: a model that cannot load must never occupy the
    port.
    """
    classifier = load_classifier(spec)
    server = create_server(classifier, spec.model_id, bind, max_body)
    with server:
        print(f"serving {spec.model_id} on {server.endpoint}", file=sys.stderr, flush=True)
        server.serve_forever()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inferd",
        description="Inference sidecar for the published political-science classifiers",
    )
    parser.add_argument("--model", choices=("sscibert", "ml"), required=True)
    parser.add_argument("--bind", default=DEFAULT_BIND, help="host:port to listen on")
    parser.add_argument(
        "--max-body", type=int, default=DEFAULT_MAX_BODY,
        help="largest accepted request body in bytes",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = ModelSpec.from_alias(args.model)
    try:
        serve(spec, args.bind, args.max_body)
    except KeyboardInterrupt:
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
