import logging
from typing import Tuple

from backend.app.commands import execute, render
from backend.app.exceptions import DecoherenceError
from backend.app.schemas import RunConfig
from tools import BackendError, run_remote

logger = logging.getLogger(__name__)


def handle_request(config: RunConfig) -> Tuple[int, str]:
    """Runs one request locally or on the backend; returns (exit status, rendered output)."""
    try:
        if config.backend_url:
            body = run_remote(config)
            return (0 if body.get("ok") else 1), body["rendered"]
        payload, ok = execute(config)
        return (0 if ok else 1), render(payload, config.fmt)
    except (ValueError, DecoherenceError, BackendError) as e:
        logger.error(f"Error handling '{config.command.value}': {e}")
        return 1, f"Error: {e}"
