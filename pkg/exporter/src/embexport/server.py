"""HTTP embedding service implementing ``POST /embed``."""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _EmbedHandler(BaseHTTPRequestHandler):
    encoder = None  # bound by make_server

    def do_POST(self):
        if self.path.rstrip("/") != "/embed":
            self._send(404, {"error": {"type": "NotFound", "message": self.path}})
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        try:
            payload = json.loads(body)
        except json.JSONDecodeError as err:
            self._send(400, {"error": {"type": "BadRequest", "message": f"invalid JSON: {err.msg}"}})
            return
        texts = payload.get("texts") if isinstance(payload, dict) else None
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            self._send(
                400,
                {"error": {"type": "BadRequest", "message": "body must be {\"texts\": [str, ...]}"}},
            )
            return
        matrix = type(self).encoder.encode(texts)
        self._send(
            200,
            {"dim": type(self).encoder.dim, "vectors": [row.tolist() for row in matrix]},
        )

    def _send(self, status: int, obj) -> None:
        out = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def log_message(self, *args):
        pass


def make_server(port: int, encoder) -> ThreadingHTTPServer:
    """Bind the service; port 0 picks a free port. Call serve_forever() to run."""
    handler = type("EmbedHandler", (_EmbedHandler,), {"encoder": encoder})
    return ThreadingHTTPServer(("0.0.0.0", port), handler)


def serve(port: int, encoder) -> None:
    server = make_server(port, encoder)
    host, bound = server.server_address[:2]
    print(f"embedding service on http://{host}:{bound}/embed (dim {encoder.dim})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
