"""HTTP sidecar serving mask-fill word proposals and sentence embeddings."""

from .app import create_app
from .config import ServiceConfig

__all__ = ["ServiceConfig", "create_app"]

__version__ = "0.1.0"
