"""
Endpoint guard for backend traffic.

Every backend request goes through an EndpointGuard, which refuses endpoints
that are not named in the configuration (or any network endpoint in offline
mode) and keeps a call log for the run manifest.
"""

import threading
from collections import OrderedDict
from typing import Dict, Iterable, List, Optional
from urllib.parse import urlsplit

from ..core.errors import OfflineViolation

LOCAL_ENDPOINT = "local"


def _normalize(endpoint: str) -> str:
    parts = urlsplit(endpoint.strip())
    if not parts.scheme:
        return endpoint.strip().rstrip("/")
    return f"{parts.scheme.lower()}://{parts.netloc.lower()}{parts.path.rstrip('/')}"


class EndpointGuard:
    """
    Allow list and call log for backend endpoints.

    Local backends (test, file, fallback) report the pseudo endpoint ``"local"``,
    which is always allowed.
    """

    def __init__(self, allowed_endpoints: Iterable[str] = (), offline: bool = False):
        """
        Args:
            allowed_endpoints: Endpoint URLs named in the configuration
            offline: Refuse every network endpoint
        """
        self.offline = offline
        self.allowed = {_normalize(e) for e in allowed_endpoints if e}
        self._calls: "OrderedDict[tuple, Dict[str, int]]" = OrderedDict()
        self._lock = threading.Lock()

    def check(self, endpoint: str) -> None:
        """
        Verify that a request to ``endpoint`` is permitted.

        Raises:
            OfflineViolation: Network endpoint in offline mode, or endpoint not configured
        """
        if endpoint == LOCAL_ENDPOINT:
            return
        if self.offline:
            raise OfflineViolation(f"Offline mode forbids contacting {endpoint}")
        if _normalize(endpoint) not in self.allowed:
            raise OfflineViolation(f"Endpoint {endpoint} is not named in the configuration")

    def record(self, backend_id: str, endpoint: str, items: int) -> None:
        """
        Check and log one request.

        Args:
            backend_id: Backend issuing the request
            endpoint: Endpoint URL or "local"
            items: Number of texts in the request
        """
        self.check(endpoint)
        key = (backend_id, endpoint)
        with self._lock:
            entry = self._calls.setdefault(key, {"calls": 0, "items": 0})
            entry["calls"] += 1
            entry["items"] += int(items)

    def network_calls(self) -> int:
        """Number of logged requests to non-local endpoints."""
        with self._lock:
            return sum(v["calls"] for (_, endpoint), v in self._calls.items() if endpoint != LOCAL_ENDPOINT)

    def call_log(self, backend_id: Optional[str] = None) -> List[dict]:
        """
        Call log sorted by (backend, endpoint).

        Args:
            backend_id: Restrict to one backend
        """
        with self._lock:
            rows = [
                {"backend_id": b, "endpoint": e, "calls": v["calls"], "items": v["items"]}
                for (b, e), v in self._calls.items()
                if backend_id is None or b == backend_id
            ]
        return sorted(rows, key=lambda row: (row["backend_id"], row["endpoint"]))
