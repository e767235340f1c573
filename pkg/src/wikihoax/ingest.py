"""MediaWiki acquisition client: revision timestamps and plain-text extracts.

Network access is deliberately boring: one rate-limited GET at a time,
bounded backoff on 429, and an on-disk cache keyed by normalized title so
corpus builds are reproducible offline. Pages reported missing by the API
are recorded as Deleted tombstones rather than errors; for hoax articles,
deletion is the expected fate, and the tombstone keeps the availability
split auditable without re-fetching.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import requests

from .timeline import format_instant, parse_instant

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_BASE_URL = "https://en.wikipedia.org/w/api.php"
DEFAULT_USER_AGENT = "wikihoax/0.1 (revision-timeline research client)"
REVISIONS_PER_REQUEST = 500
BACKOFF_BASE_SECONDS = 1.0
BACKOFF_CAP_SECONDS = 60.0


class FetchStatus(enum.Enum):
    OK = "Ok"
    MISSING = "Missing"
    DELETED = "Deleted"
    RATE_LIMITED = "RateLimited"
    NETWORK_ERROR = "NetworkError"


@dataclass(frozen=True)
class WikiPageRef:
    title: str
    resolved_id: int | None = None

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError("page title must be non-empty")


@dataclass
class FetchResult:
    """Payload is a timestamp list or extract text, present only on Ok."""

    page: WikiPageRef
    status: FetchStatus
    payload: list | str | None
    fetched_at: datetime
    detail: str = ""


@dataclass
class ClientConfig:
    base_url: str = DEFAULT_BASE_URL
    user_agent: str = DEFAULT_USER_AGENT
    rate: float = 1.0  # requests per second
    max_attempts: int = 5
    cache_dir: str | None = None
    timeout: float = 30.0

    def resolved_cache_dir(self) -> Path:
        if self.cache_dir:
            return Path(self.cache_dir)
        env = os.environ.get("WIKIHOAX_CACHE_DIR", "").strip()
        if env:
            return Path(env)
        return Path.home() / ".cache" / "wikihoax"


def normalize_title(title: str) -> str:
    """Collapse whitespace and uppercase the first letter, MediaWiki style."""
    flat = " ".join(title.split())
    if not flat:
        raise ValueError("page title must be non-empty")
    return (flat[0].upper() + flat[1:]).replace(" ", "_")


def _cache_path(root: Path, kind: str, normalized: str) -> Path:
    digest = hashlib.sha256(f"{kind}:{normalized}".encode()).hexdigest()
    return root / digest[:2] / f"{digest}.json"


class _TransportError(Exception):
    """Internal: carries the terminal status for a failed network exchange."""

    def __init__(self, status: FetchStatus, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def _single_page(body) -> dict:
    try:
        page = body["query"]["pages"][0]
    except (KeyError, IndexError, TypeError):
        raise _TransportError(
            FetchStatus.NETWORK_ERROR, "malformed API response: no pages in body"
        )
    if not isinstance(page, dict):
        raise _TransportError(
            FetchStatus.NETWORK_ERROR, "malformed API response: page is not an object"
        )
    return page


class WikiClient:
    """One rate-limited request at a time; safe to share across threads.

    The lock is held while waiting out the rate limit, which is what
    serializes concurrent fetches into a single polite request stream.
    ``sleep`` and ``rng`` are injectable so tests never wall-clock wait.
    """

    def __init__(self, config: ClientConfig | None = None, session=None,
                 sleep=time.sleep, rng: random.Random | None = None):
        self.config = config or ClientConfig()
        self._session = session or requests.Session()
        self._session.headers["User-Agent"] = self.config.user_agent
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._lock = threading.Lock()
        self._next_slot = 0.0

    # -- public operations --

    def fetch_revision_timestamps(self, page: WikiPageRef) -> FetchResult:
        return self._fetch(page, "revisions")

    def fetch_extract(self, page: WikiPageRef) -> FetchResult:
        return self._fetch(page, "extract")

    def cache_gc(self, max_age_seconds: float) -> int:
        """Evict cache entries older than max_age_seconds; returns the count.

        Unreadable entries are skipped with a warning and are not counted
        as evicted.
        """
        root = self.config.resolved_cache_dir()
        if not root.is_dir():
            return 0
        cutoff = time.time() - max_age_seconds
        evicted = 0
        unreadable = 0
        for path in sorted(root.glob("*/*.json")):
            try:
                if path.stat().st_mtime < cutoff:
                    path.unlink()
                    evicted += 1
            except OSError as exc:
                unreadable += 1
                log.warning("skipping unreadable cache entry %s: %s", path, exc)
        if unreadable:
            log.warning("cache gc skipped %d unreadable entries", unreadable)
        return evicted

    # -- fetch plumbing --

    def _fetch(self, page: WikiPageRef, kind: str) -> FetchResult:
        normalized = normalize_title(page.title)
        cached = self._cache_load(kind, normalized)
        if cached is not None:
            return FetchResult(
                page=page,
                status=FetchStatus(cached["status"]),
                payload=cached["payload"],
                fetched_at=parse_instant(cached["fetched_at"]),
                detail="cache",
            )
        fetched_at = datetime.now(timezone.utc)
        try:
            if kind == "revisions":
                status, payload = self._revisions_live(normalized)
            else:
                status, payload = self._extract_live(normalized)
        except _TransportError as exc:
            log.warning("%s '%s': %s", kind, normalized, exc.detail)
            return FetchResult(page=page, status=exc.status, payload=None,
                               fetched_at=fetched_at, detail=exc.detail)
        # Ok and tombstones are stable facts worth caching; throttling and
        # transport failures are transient, so they are retried next run.
        self._cache_store(kind, normalized, status, payload, fetched_at)
        return FetchResult(page=page, status=status, payload=payload,
                           fetched_at=fetched_at)

    def _revisions_live(self, normalized: str):
        params = {
            "action": "query",
            "format": "json",
            "formatversion": "2",
            "prop": "revisions",
            "rvprop": "timestamp",
            "rvlimit": str(REVISIONS_PER_REQUEST),
            "rvdir": "newer",
            "titles": normalized.replace("_", " "),
        }
        stamps: list[str] = []
        cont: dict = {}
        while True:
            body = self._get_json({**params, **cont})
            pg = _single_page(body)
            if pg.get("invalid"):
                return FetchStatus.MISSING, None
            if pg.get("missing"):
                return FetchStatus.DELETED, None
            for rev in pg.get("revisions", []):
                if not isinstance(rev, dict) or "timestamp" not in rev:
                    raise _TransportError(
                        FetchStatus.NETWORK_ERROR,
                        "malformed API response: revision without timestamp",
                    )
                stamps.append(rev["timestamp"])
            nxt = body.get("continue")
            if not nxt:
                break
            cont = dict(nxt)
        if not stamps:
            raise _TransportError(
                FetchStatus.NETWORK_ERROR, "malformed API response: page has no revisions"
            )
        stamps.sort(key=parse_instant)
        return FetchStatus.OK, stamps

    def _extract_live(self, normalized: str):
        params = {
            "action": "query",
            "format": "json",
            "formatversion": "2",
            "prop": "extracts",
            "explaintext": "1",
            "titles": normalized.replace("_", " "),
        }
        pg = _single_page(self._get_json(params))
        if pg.get("invalid"):
            return FetchStatus.MISSING, None
        if pg.get("missing"):
            return FetchStatus.DELETED, None
        if "extract" not in pg:
            raise _TransportError(
                FetchStatus.NETWORK_ERROR, "malformed API response: page has no extract"
            )
        return FetchStatus.OK, str(pg["extract"])

    def _get_json(self, params: dict):
        for attempt in range(1, self.config.max_attempts + 1):
            self._throttle()
            try:
                resp = self._session.get(self.config.base_url, params=params,
                                         timeout=self.config.timeout)
            except requests.RequestException as exc:
                raise _TransportError(
                    FetchStatus.NETWORK_ERROR, f"transport failure: {exc}"
                )
            if resp.status_code == 429:
                if attempt == self.config.max_attempts:
                    raise _TransportError(
                        FetchStatus.RATE_LIMITED,
                        f"still throttled after {attempt} attempts",
                    )
                delay = min(BACKOFF_BASE_SECONDS * 2 ** (attempt - 1),
                            BACKOFF_CAP_SECONDS)
                self._sleep(delay + self._rng.uniform(0.0, 0.5))
                continue
            if resp.status_code != 200:
                raise _TransportError(
                    FetchStatus.NETWORK_ERROR,
                    f"HTTP {resp.status_code} from {self.config.base_url}",
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise _TransportError(
                    FetchStatus.NETWORK_ERROR, f"malformed API response: {exc}"
                )
        raise AssertionError("unreachable")

    def _throttle(self):
        interval = 1.0 / self.config.rate if self.config.rate > 0 else 0.0
        with self._lock:
            wait = self._next_slot - time.monotonic()
            if wait > 0:
                self._sleep(wait + self._rng.uniform(0.0, 0.1 * interval))
            self._next_slot = max(time.monotonic(), self._next_slot) + interval

    # -- cache plumbing --

    def _cache_load(self, kind: str, normalized: str):
        path = _cache_path(self.config.resolved_cache_dir(), kind, normalized)
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            log.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None

    def _cache_store(self, kind: str, normalized: str, status: FetchStatus,
                     payload, fetched_at: datetime) -> None:
        if status not in (FetchStatus.OK, FetchStatus.DELETED, FetchStatus.MISSING):
            return
        path = _cache_path(self.config.resolved_cache_dir(), kind, normalized)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "format_version": FORMAT_VERSION,
            "kind": kind,
            "title": normalized,
            "status": status.value,
            "payload": payload,
            "fetched_at": format_instant(fetched_at),
        }
        tmp = path.parent / f"{path.stem}.{os.getpid()}.tmp"
        tmp.write_text(json.dumps(entry, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)


# Spec-shaped conveniences: one-shot calls that do not share rate state.
# Batch work should hold a single WikiClient so the limiter sees every request.

def fetch_revision_timestamps(page: WikiPageRef,
                              config: ClientConfig | None = None) -> FetchResult:
    return WikiClient(config).fetch_revision_timestamps(page)


def fetch_extract(page: WikiPageRef,
                  config: ClientConfig | None = None) -> FetchResult:
    return WikiClient(config).fetch_extract(page)


def cache_gc(max_age_seconds: float, config: ClientConfig | None = None) -> int:
    return WikiClient(config).cache_gc(max_age_seconds)


def load_title_list(path) -> list[dict]:
    """Line-delimited JSON rows {id, title, label?} driving the ingest command."""
    rows: list[dict] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {n}: invalid JSON ({exc.msg})")
            if not isinstance(row, dict):
                raise ValueError(f"line {n}: expected an object")
            for field_name in ("id", "title"):
                if field_name not in row:
                    raise ValueError(f"line {n}: missing {field_name}")
            rid = row["id"]
            if not isinstance(rid, str) or not rid:
                raise ValueError(f"line {n}: empty id")
            if not str(row["title"]).strip():
                raise ValueError(f"line {n}: empty title")
            if rid in seen:
                raise ValueError(f"duplicate id '{rid}' on lines {seen[rid]} and {n}")
            seen[rid] = n
            label = row.get("label")
            if label not in (None, 0, 1):
                raise ValueError(f"line {n}: label must be 0 or 1")
            rows.append({"id": rid, "title": str(row["title"]), "label": label})
    if not rows:
        raise ValueError("title list is empty")
    return rows
