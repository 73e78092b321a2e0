"""HTTP annotation service: POST /annotate and GET /health.

The service core is plain Python (dict in, status + dict out) so it unit
tests without sockets; a ThreadingHTTPServer wraps it.  Pipelines are cached
per (language, processors) with LRU eviction; the cache lock is never held
while annotating.  /health answers 503 until every preloaded model is ready,
200 afterwards.  On SIGTERM/SIGINT the listener stops, in-flight requests
get a bounded drain window, then the process exits cleanly.
"""

from __future__ import annotations

import json
import signal
import threading
import time
from collections import OrderedDict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .pipeline import PROCESSOR_ORDER, PipelineConfig, PipelineError, build_pipeline
from .wire import canonical_json, document_to_wire

DEFAULT_PORT = 9000
DEFAULT_MAX_TEXT_BYTES = 1 << 20
DEFAULT_DRAIN_TIMEOUT_S = 10.0
_REQUEST_FIELDS = {"text", "language", "processors", "format"}


class AnnotationService:
    def __init__(self, registry_root=None, max_text_bytes=DEFAULT_MAX_TEXT_BYTES,
                 cache_size=4):
        self.registry_root = registry_root
        self.max_text_bytes = max_text_bytes
        self.cache_size = cache_size
        self._cache: OrderedDict[tuple, object] = OrderedDict()
        self._lock = threading.Lock()
        self._ready = threading.Event()
        self._started = time.monotonic()
        self._inflight = 0

    # -- lifecycle ---------------------------------------------------------
    def preload(self, specs: list[tuple[str, tuple[str, ...]]]):
        """Build the given pipelines, then flip /health to ok."""
        for language, processors in specs:
            self._pipeline(language, processors)
        self.mark_ready()

    def mark_ready(self):
        self._ready.set()

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    # -- pipeline cache ----------------------------------------------------
    def _pipeline(self, language: str, processors: tuple[str, ...]):
        key = (language, tuple(processors))
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        pipeline = build_pipeline(PipelineConfig(
            language=language, processors=tuple(processors),
            registry_root=self.registry_root))
        with self._lock:
            self._cache[key] = pipeline
            self._cache.move_to_end(key)
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return pipeline

    def loaded_models(self) -> list[dict]:
        with self._lock:
            return [{"language": lang, "processors": list(pipe.processors)}
                    for (lang, _), pipe in self._cache.items()]

    # -- endpoints ---------------------------------------------------------
    def health(self) -> tuple[int, dict]:
        if not self.ready:
            return 503, {"status": "loading", "models": self.loaded_models(),
                         "uptime_s": int(time.monotonic() - self._started)}
        return 200, {"status": "ok", "models": self.loaded_models(),
                     "uptime_s": int(time.monotonic() - self._started)}

    def annotate(self, payload) -> tuple[int, dict]:
        if not self.ready:
            return 503, {"error": "models are still loading"}
        if not isinstance(payload, dict):
            return 400, {"error": "request body must be a JSON object"}
        unknown = set(payload) - _REQUEST_FIELDS
        if unknown:
            return 400, {"error": f"unknown request fields: {', '.join(sorted(unknown))}",
                         "supported_fields": sorted(_REQUEST_FIELDS)}
        text = payload.get("text")
        if not isinstance(text, str):
            return 400, {"error": "field 'text' is required and must be a string"}
        language = payload.get("language")
        if not isinstance(language, str) or not language:
            return 400, {"error": "field 'language' is required and must be a string"}
        if len(text.encode("utf-8")) > self.max_text_bytes:
            return 413, {"error": f"text exceeds {self.max_text_bytes} bytes"}
        fmt = payload.get("format", "json")
        if fmt != "json":
            return 400, {"error": f"unsupported format {fmt!r}; only 'json'"}
        processors = payload.get("processors", [])
        if processors is None:
            processors = []
        if not isinstance(processors, list) or not all(isinstance(p, str) for p in processors):
            return 400, {"error": "field 'processors' must be a list of strings"}
        try:
            pipeline = self._pipeline(language, tuple(processors))
        except PipelineError as exc:
            return 400, {"error": str(exc),
                         "supported_processors": list(PROCESSOR_ORDER)}
        try:
            document = pipeline.run(text)
        except Exception as exc:  # annotation must not drop the connection
            return 500, {"error": f"annotation failed: {exc}"}
        return 200, document_to_wire(document, language=language)

    # -- drain bookkeeping ---------------------------------------------------
    def request_started(self):
        with self._lock:
            self._inflight += 1

    def request_finished(self):
        with self._lock:
            self._inflight -= 1

    def drain(self, timeout_s: float) -> bool:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            with self._lock:
                if self._inflight == 0:
                    return True
            time.sleep(0.02)
        return False


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> AnnotationService:
        return self.server.service

    def _send(self, status: int, body: dict):
        payload = canonical_json(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        if self.path == "/health":
            status, body = self.service.health()
            self._send(status, body)
        else:
            self._send(404, {"error": f"no such endpoint {self.path}"})

    def do_POST(self):
        if self.path != "/annotate":
            self._send(404, {"error": f"no such endpoint {self.path}"})
            return
        length = int(self.headers.get("Content-Length", 0))
        if length > self.service.max_text_bytes + 65536:
            self._send(413, {"error": "request body too large"})
            return
        raw = self.rfile.read(length)
        self.service.request_started()
        try:
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._send(400, {"error": f"malformed JSON body: {exc}"})
                return
            status, body = self.service.annotate(payload)
            self._send(status, body)
        finally:
            self.service.request_finished()

    def log_message(self, fmt, *args):
        pass  # request logging off; errors still surface via responses


class AnnotationHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, service: AnnotationService, timeout_ms: int = 30_000):
        super().__init__(address, _Handler)
        self.service = service
        self._handler_timeout = timeout_ms / 1000.0

    def finish_request(self, request, client_address):
        request.settimeout(self._handler_timeout)
        super().finish_request(request, client_address)


def serve(port: int = DEFAULT_PORT, registry_root=None,
          preload: list[tuple[str, tuple[str, ...]]] | None = None,
          max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES, timeout_ms: int = 30_000,
          host: str = "127.0.0.1",
          drain_timeout_s: float = DEFAULT_DRAIN_TIMEOUT_S) -> int:
    service = AnnotationService(registry_root=registry_root,
                                max_text_bytes=max_text_bytes)
    httpd = AnnotationHTTPServer((host, port), service, timeout_ms=timeout_ms)

    def load():
        try:
            service.preload(preload or [])
        except Exception as exc:  # startup failure: report and stop serving
            print(f"model preload failed: {exc}", flush=True)
            httpd.shutdown()

    loader = threading.Thread(target=load, name="preload", daemon=True)
    loader.start()

    def handle_signal(signum, frame):
        threading.Thread(target=httpd.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, handle_signal)
    signal.signal(signal.SIGINT, handle_signal)
    print(f"annopipe server listening on {host}:{httpd.server_address[1]}", flush=True)
    try:
        httpd.serve_forever(poll_interval=0.1)
    finally:
        service.drain(drain_timeout_s)
        httpd.server_close()
    return 0
