import socket
import subprocess
import sys
from pathlib import Path

import pytest

PRIMARY_ROOT = Path(__file__).resolve().parents[2]
BUILD_SCRIPT = PRIMARY_ROOT / "scripts" / "build_toy_models.py"


@pytest.fixture(scope="session")
def toy_registry(tmp_path_factory) -> Path:
    """Build the primary's toy model registry through its public script."""
    root = tmp_path_factory.mktemp("registry")
    subprocess.run(
        [sys.executable, str(BUILD_SCRIPT), "--out", str(root)],
        check=True, capture_output=True, text=True, timeout=600)
    return root


@pytest.fixture()
def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def server_command(registry: Path) -> list[str]:
    return [sys.executable, "-m", "annopipe.cli", "serve",
            "--registry", str(registry), "--preload", "fx:"]


@pytest.fixture()
def spawn_config(toy_registry, free_port):
    from annopipe_client import ClientConfig

    return ClientConfig(
        server_command=server_command(toy_registry),
        port=free_port,
        language="fx",
        startup_timeout_s=60.0,
        health_poll_interval_s=0.5,
        backoff_base_s=0.2,
    )
