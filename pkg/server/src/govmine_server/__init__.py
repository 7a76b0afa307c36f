"""Model-server sidecar implementing contract/model-server-v1.json."""

from .app import create_app

__all__ = ["create_app"]
