"""ASGI entrypoint at the repository root, so `uv run uvicorn main:app` works
without changing into the package directory."""

from hybridrelay.main import app

__all__ = ["app"]
