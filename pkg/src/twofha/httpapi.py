"""HTTP/JSON front of the login server.

Endpoints:
    POST /register  {username, password, channel}  -> {username, m_index, n}
    POST /login     {username, password}           -> {challenge_id, qr_payloads, delivery}
    POST /verify    {challenge_id, otp}            -> {session_id, expires_at}
    GET  /health                                   -> {"ls": ..., "hc": ...}
    GET  /dev/inbox?kind=sms                       -> dev-only inbox view (flag-gated)

Error statuses: 400 malformed, 401 bad credentials / bad OTP, 403 suspended,
404 unknown challenge, 409 username taken, 410 challenge gone, 503 honeychecker
unavailable. Error bodies carry {"status": "<reason-token>"}.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .delivery import ChannelKind
from .errors import HoneycheckerUnavailable, InvalidArgument, UsernameTaken
from .loginserver import (
    ChallengeIssued,
    Denied,
    DenialReason,
    LoginService,
    Session,
)

logger = logging.getLogger("twofha.httpapi")

_DENIAL_STATUS = {
    DenialReason.BAD_CREDENTIALS: 401,
    DenialReason.BAD_OTP: 401,
    DenialReason.SUSPENDED: 403,
    DenialReason.UNKNOWN_CHALLENGE: 404,
    DenialReason.CHALLENGE_GONE: 410,
    DenialReason.UNAVAILABLE: 503,
}


class LoginApiServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(
        self,
        host: str,
        port: int,
        service: LoginService,
        dev_inbox: bool = False,
        static_dir: str | Path | None = None,
    ):
        super().__init__((host, port), _ApiHandler)
        self.service = service
        self.dev_inbox = dev_inbox
        self.static_dir = Path(static_dir).resolve() if static_dir else None

    @property
    def port(self) -> int:
        return self.server_address[1]


class _ApiHandler(BaseHTTPRequestHandler):
    server_version = "twofha-ls/0.1"
    protocol_version = "HTTP/1.1"

    server: LoginApiServer  # set by the server machinery

    def log_message(self, fmt, *args):
        logger.debug("%s - %s", self.address_string(), fmt % args)

    # -- plumbing ---------------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self._cors_headers()
        self.end_headers()
        self.wfile.write(body)

    def _cors_headers(self) -> None:
        # the demo UI may be served from a dev server on another origin
        if self.server.dev_inbox:
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")

    def _read_body(self) -> dict | None:
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            parsed = json.loads(raw.decode("utf-8")) if raw else {}
        except (ValueError, UnicodeDecodeError):
            return None
        return parsed if isinstance(parsed, dict) else None

    def _field(self, body: dict, name: str) -> str | None:
        value = body.get(name)
        return value if isinstance(value, str) and value else None

    # -- routes -----------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Content-Length", "0")
        self._cors_headers()
        self.end_headers()

    def do_POST(self):
        path = urlparse(self.path).path
        body = self._read_body()
        if body is None:
            self._send_json(400, {"status": "malformed", "detail": "invalid JSON body"})
            return
        if path == "/register":
            self._handle_register(body)
        elif path == "/login":
            self._handle_login(body)
        elif path == "/verify":
            self._handle_verify(body)
        else:
            self._send_json(404, {"status": "not-found"})

    def do_GET(self):
        parsed = urlparse(self.path)
        if parsed.path == "/health":
            health = self.server.service.health()
            self._send_json(200 if health["hc"] == "ok" else 503, health)
        elif parsed.path == "/dev/inbox" and self.server.dev_inbox:
            self._handle_dev_inbox(parse_qs(parsed.query))
        elif self.server.static_dir is not None:
            self._handle_static(parsed.path)
        else:
            self._send_json(404, {"status": "not-found"})

    # -- handlers ---------------------------------------------------------------

    def _handle_register(self, body: dict) -> None:
        username = self._field(body, "username")
        password = self._field(body, "password")
        channel = body.get("channel", "sms")
        if username is None or password is None:
            self._send_json(400, {"status": "malformed", "detail": "username and password required"})
            return
        try:
            channel = ChannelKind(channel)
        except ValueError:
            self._send_json(400, {"status": "malformed", "detail": f"unknown channel {channel!r}"})
            return
        try:
            receipt = self.server.service.register(username, password, channel)
        except UsernameTaken:
            self._send_json(409, {"status": "username-taken"})
            return
        except InvalidArgument as exc:
            self._send_json(400, {"status": "malformed", "detail": str(exc)})
            return
        except HoneycheckerUnavailable:
            self._send_json(503, {"status": "unavailable"})
            return
        self._send_json(
            200,
            {"username": receipt.username, "m_index": receipt.m_index, "n": receipt.n},
        )

    def _handle_login(self, body: dict) -> None:
        username = self._field(body, "username")
        password = self._field(body, "password")
        if username is None or password is None:
            self._send_json(400, {"status": "malformed", "detail": "username and password required"})
            return
        result = self.server.service.login_phase1(username, password)
        if isinstance(result, Denied):
            self._send_json(_DENIAL_STATUS[result.reason], {"status": result.reason.value})
            return
        assert isinstance(result, ChallengeIssued)
        self._send_json(
            200,
            {
                "challenge_id": result.challenge_id,
                "qr_payloads": [
                    {"label": p.label, "text": p.text} for p in result.qr_payloads
                ],
                "delivery": result.delivery,
            },
        )

    def _handle_verify(self, body: dict) -> None:
        challenge_id = self._field(body, "challenge_id")
        otp = self._field(body, "otp")
        if challenge_id is None or otp is None:
            self._send_json(400, {"status": "malformed", "detail": "challenge_id and otp required"})
            return
        result = self.server.service.login_phase2(challenge_id, otp)
        if isinstance(result, Denied):
            self._send_json(_DENIAL_STATUS[result.reason], {"status": result.reason.value})
            return
        assert isinstance(result, Session)
        self._send_json(
            200, {"session_id": result.session_id, "expires_at": result.expires_at}
        )

    def _handle_dev_inbox(self, query: dict) -> None:
        kind_value = query.get("kind", ["sms"])[0]
        try:
            kind = ChannelKind(kind_value)
        except ValueError:
            self._send_json(400, {"status": "malformed", "detail": f"unknown kind {kind_value!r}"})
            return
        sink = self.server.service.sinks.get(kind)
        records: list[dict] = []
        if sink is None:
            pass
        elif hasattr(sink, "records"):  # MemorySink
            records = list(sink.records)
        elif hasattr(sink, "path") and Path(sink.path).exists():  # FileSink
            with Path(sink.path).open("r", encoding="utf-8") as f:
                records = [json.loads(line) for line in f if line.strip()]
        self._send_json(200, {"kind": kind.value, "records": records[-20:]})

    def _handle_static(self, path: str) -> None:
        root = self.server.static_dir
        relative = path.lstrip("/") or "index.html"
        target = (root / relative).resolve()
        if root not in target.parents and target != root:
            self._send_json(404, {"status": "not-found"})
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json(404, {"status": "not-found"})
            return
        content_type = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self._cors_headers()
        self.end_headers()
        self.wfile.write(data)


def make_api_server(
    service: LoginService,
    host: str = "127.0.0.1",
    port: int = 0,
    dev_inbox: bool = False,
    static_dir: str | Path | None = None,
) -> LoginApiServer:
    return LoginApiServer(host, port, service, dev_inbox=dev_inbox, static_dir=static_dir)


def serve_in_thread(server: LoginApiServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
