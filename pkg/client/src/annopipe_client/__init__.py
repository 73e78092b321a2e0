"""Client SDK for the annopipe annotation server."""

from .client import (
    AnnotationClientError,
    AnnotationRejected,
    Client,
    ClientConfig,
    ServerStartupError,
    ServerUnavailable,
)
from .document import (
    ClientDocument,
    ClientEntity,
    ClientSentence,
    ClientToken,
    ClientWord,
    canonical_json,
)

__all__ = [
    "AnnotationClientError",
    "AnnotationRejected",
    "Client",
    "ClientConfig",
    "ClientDocument",
    "ClientEntity",
    "ClientSentence",
    "ClientToken",
    "ClientWord",
    "ServerStartupError",
    "ServerUnavailable",
    "canonical_json",
]
