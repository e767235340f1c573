"""Shared fixtures: a threaded mock MediaWiki server with a request counter.

The mock speaks just enough of the action API (formatversion=2) for the
ingest client: canned titles select canned behaviors, including paginated
revision histories, missing/invalid pages, throttling, and garbage bodies.
"""

import json
import threading
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import pytest
from hypothesis import settings as hypothesis_settings

hypothesis_settings.register_profile("suite", deadline=None, derandomize=True)
hypothesis_settings.load_profile("suite")


def _stamps(start: datetime, count: int) -> list:
    out = []
    for i in range(count):
        t = start + timedelta(days=i)
        out.append(t.strftime("%Y-%m-%dT%H:%M:%SZ"))
    return out


THREE_STAMPS = _stamps(datetime(2015, 1, 1, tzinfo=timezone.utc), 3)
BIG_STAMPS = _stamps(datetime(2010, 1, 1, tzinfo=timezone.utc), 1200)
# Page breaks for the continuation fixture: 500 + 500 + 200.
BIG_PAGES = {
    None: (BIG_STAMPS[:500], "c1"),
    "c1": (BIG_STAMPS[500:1000], "c2"),
    "c2": (BIG_STAMPS[1000:], None),
}
EXTRACTS = {
    "Three": "Three is the number after two.",
    "Big": "A page with a long history.",
}


class _MockWikiHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def _send_json(self, payload) -> None:
        self._send_raw(200, json.dumps(payload).encode())

    def _send_raw(self, code: int, body: bytes) -> None:
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        server = self.server
        with server.counter_lock:
            server.request_count += 1
            flaky = server.flaky_remaining > 0
            if flaky:
                server.flaky_remaining -= 1
        q = {k: v[0] for k, v in parse_qs(urlparse(self.path).query).items()}
        title = q.get("titles", "")
        if title == "Always throttled" or (title == "Flaky" and flaky):
            self._send_raw(429, b"")
            return
        if title == "Malformed":
            self._send_raw(200, b"{not json")
            return
        if title == "Missing":
            self._send_json({"query": {"pages": [{"title": title, "missing": True}]}})
            return
        if title == "Invalid":
            self._send_json({"query": {"pages": [{"title": title, "invalid": True}]}})
            return
        if q.get("prop") == "revisions":
            self._revisions(title, q)
        elif q.get("prop") == "extracts":
            self._extracts(title)
        else:
            self._send_raw(400, b"{}")

    def _revisions(self, title: str, q: dict) -> None:
        if title == "Big":
            stamps, nxt = BIG_PAGES[q.get("rvcontinue")]
            body = {
                "query": {
                    "pages": [
                        {"pageid": 42, "title": title,
                         "revisions": [{"timestamp": s} for s in stamps]}
                    ]
                }
            }
            if nxt:
                body["continue"] = {"rvcontinue": nxt, "continue": "||"}
            self._send_json(body)
            return
        if title in ("Three", "Flaky"):
            body = {
                "query": {
                    "pages": [
                        {"pageid": 7, "title": title,
                         "revisions": [{"timestamp": s} for s in THREE_STAMPS]}
                    ]
                }
            }
            self._send_json(body)
            return
        self._send_json({"query": {"pages": [{"title": title, "missing": True}]}})

    def _extracts(self, title: str) -> None:
        if title in EXTRACTS:
            self._send_json({
                "query": {
                    "pages": [{"pageid": 7, "title": title, "extract": EXTRACTS[title]}]
                }
            })
            return
        self._send_json({"query": {"pages": [{"title": title, "missing": True}]}})


@pytest.fixture
def mock_wiki():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _MockWikiHandler)
    server.request_count = 0
    server.counter_lock = threading.Lock()
    server.flaky_remaining = 0
    server.base_url = f"http://127.0.0.1:{server.server_address[1]}/w/api.php"
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
