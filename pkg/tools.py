import logging
from typing import Any, Dict

import httpx

from backend.app.schemas import RunConfig
from config import REQUEST_TIMEOUT

logger = logging.getLogger(__name__)


class BackendError(Exception):
    pass


def run_remote(config: RunConfig) -> Dict[str, Any]:
    """Forwards a request to a running analysis backend and returns its JSON reply."""
    url = f"{config.backend_url.rstrip('/')}/analysis/run"
    payload = config.model_dump(mode="json", exclude={"output", "backend_url"})
    logger.info(f"--- Calling backend ---\nURL: {url}")
    try:
        response = httpx.post(url, json=payload, timeout=REQUEST_TIMEOUT)
    except httpx.HTTPError as e:
        raise BackendError(f"Could not reach backend at {url}: {e}") from e
    body = response.json() if response.headers.get("content-type", "").startswith("application/json") else {}
    if response.status_code != 200 or "error" in body:
        raise BackendError(body.get("error") or f"HTTP {response.status_code} from {url}")
    return body
