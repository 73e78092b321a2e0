"""Annotation server client: spawn or attach, poll health, restart, annotate.

In spawn mode the client owns a server subprocess: it launches the command
(appending ``--port``), waits for /health, keeps a background poller watching
it, and restarts it with exponential backoff when it dies.  In attach mode
the client only observes an existing endpoint and never restarts anything.
"""

from __future__ import annotations

import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import requests

from .document import ClientDocument


class AnnotationClientError(RuntimeError):
    pass


class ServerStartupError(AnnotationClientError):
    pass


class ServerUnavailable(AnnotationClientError):
    pass


class AnnotationRejected(AnnotationClientError):
    """The server answered with an error status; carries code and body."""

    def __init__(self, status: int, body: str):
        super().__init__(f"server answered {status}: {body[:400]}")
        self.status = status
        self.body = body


@dataclass(frozen=True)
class ClientConfig:
    """Exactly one of ``server_command`` (spawn mode) or ``endpoint``
    (attach mode) must be given."""

    server_command: Optional[Sequence[str]] = None  # client appends --port
    endpoint: Optional[str] = None
    port: int = 9000
    language: str = "en"
    annotators: tuple[str, ...] = ()
    startup_timeout_s: float = 30.0
    health_poll_interval_s: float = 5.0
    max_restart_attempts: int = 3
    backoff_base_s: float = 1.0
    request_timeout_s: float = 60.0

    def __post_init__(self):
        if (self.server_command is None) == (self.endpoint is None):
            raise ValueError(
                "configure either server_command (spawn mode) or endpoint "
                "(attach mode), never both")

    @property
    def spawn_mode(self) -> bool:
        return self.server_command is not None

    @property
    def base_url(self) -> str:
        if self.endpoint is not None:
            return self.endpoint.rstrip("/")
        return f"http://127.0.0.1:{self.port}"


class Client:
    """Context-managed annotation client.

    Safe for sequential use from one thread and for concurrent ``annotate``
    calls from several (requests pools connections; restarts are serialized).
    """

    def __init__(self, config: ClientConfig):
        self.config = config
        self._session = requests.Session()
        self._process: Optional[subprocess.Popen] = None
        self._log_file = None
        self._restart_lock = threading.Lock()
        self._poller: Optional[threading.Thread] = None
        self._stop_polling = threading.Event()
        self._started = False
        self.restart_count = 0
        self.gave_up = False  # max consecutive restart attempts exhausted

    # -- lifecycle -----------------------------------------------------------
    def start(self) -> "Client":
        if self._started:
            return self
        if self.config.spawn_mode:
            self._spawn()
            if not self._wait_healthy(self.config.startup_timeout_s):
                logs = self._captured_logs()
                self._kill_process()
                raise ServerStartupError(
                    f"server did not become healthy within "
                    f"{self.config.startup_timeout_s}s; captured output:\n{logs}")
        else:
            if not self.check_health():
                raise ServerStartupError(
                    f"no healthy server at {self.config.base_url}")
        self._started = True
        self._stop_polling.clear()
        self._poller = threading.Thread(target=self._poll_loop, daemon=True,
                                        name="annopipe-client-health")
        self._poller.start()
        return self

    def stop(self):
        """Terminate the owned server (graceful, then forced); idempotent."""
        self._stop_polling.set()
        if self._poller is not None:
            self._poller.join(timeout=self.config.health_poll_interval_s + 1)
            self._poller = None
        self._kill_process()
        self._session.close()
        self._started = False

    def __enter__(self) -> "Client":
        return self.start()

    def __exit__(self, *exc):
        self.stop()
        return False

    @property
    def server_pid(self) -> Optional[int]:
        return self._process.pid if self._process is not None else None

    # -- health and recovery ---------------------------------------------------
    def check_health(self) -> bool:
        try:
            response = self._session.get(
                self.config.base_url + "/health",
                timeout=min(self.config.health_poll_interval_s, 5.0))
            return response.status_code == 200
        except requests.RequestException:
            return False

    def ensure_alive(self) -> bool:
        """True when the server answers /health, restarting it first if this
        client owns it.  Attach mode reports without restarting."""
        if self.check_health():
            return True
        if not self.config.spawn_mode or self.gave_up:
            return False
        return self._restart()

    def _restart(self) -> bool:
        with self._restart_lock:
            if self.check_health():  # another thread already recovered it
                return True
            for attempt in range(self.config.max_restart_attempts):
                time.sleep(self.config.backoff_base_s * (2 ** attempt))
                self._kill_process()
                self._spawn()
                self.restart_count += 1
                if self._wait_healthy(self.config.startup_timeout_s):
                    return True
            self.gave_up = True
            return False

    def _poll_loop(self):
        while not self._stop_polling.wait(self.config.health_poll_interval_s):
            if self.gave_up:
                break
            self.ensure_alive()

    def _wait_healthy(self, timeout_s: float) -> bool:
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            if self.check_health():
                return True
            if self._process is not None and self._process.poll() is not None:
                return False  # child already exited; no point waiting
            time.sleep(0.1)
        return self.check_health()

    # -- process ownership -----------------------------------------------------
    def _spawn(self):
        self._log_file = tempfile.TemporaryFile(mode="w+", encoding="utf-8")
        command = list(self.config.server_command) + ["--port", str(self.config.port)]
        self._process = subprocess.Popen(
            command, stdout=self._log_file, stderr=subprocess.STDOUT, text=True)

    def _captured_logs(self) -> str:
        if self._log_file is None:
            return ""
        try:
            self._log_file.seek(0)
            return self._log_file.read()
        except (OSError, ValueError):
            return ""

    def _kill_process(self, grace_s: float = 10.0):
        process, self._process = self._process, None
        if process is None:
            return
        if process.poll() is None:
            process.terminate()
            try:
                process.wait(timeout=grace_s)
            except subprocess.TimeoutExpired:
                process.kill()
                process.wait()
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None

    # -- annotation ------------------------------------------------------------
    def annotate(self, text: str, processors: Optional[Sequence[str]] = None) -> ClientDocument:
        """POST /annotate; one transparent recovery + retry on connection
        failure, then the error surfaces."""
        payload = {"text": text, "language": self.config.language}
        chosen = tuple(processors) if processors is not None else self.config.annotators
        if chosen:
            payload["processors"] = list(chosen)
        try:
            return self._post(payload)
        except (requests.ConnectionError, requests.Timeout) as first:
            if not self.ensure_alive():
                raise ServerUnavailable(
                    f"server unreachable and not recoverable: {first}") from first
            try:
                return self._post(payload)
            except (requests.ConnectionError, requests.Timeout) as second:
                raise ServerUnavailable(
                    f"server lost again after restart: {second}") from second

    def _post(self, payload: dict) -> ClientDocument:
        response = self._session.post(
            self.config.base_url + "/annotate", json=payload,
            timeout=self.config.request_timeout_s)
        if response.status_code != 200:
            raise AnnotationRejected(response.status_code, response.text)
        return ClientDocument.from_wire(response.json())
