"""The honeychecker: a minimal hardened index server.

Stores nothing but (domain, user) -> correct index and answers exactly two
commands, Check and Set, over a single-line TCP protocol. A Check that
mismatches (or names an unknown user) raises an alarm: that is the breach
signal the whole scheme exists for. No password, sweetword, or OTP material
ever reaches this process.

Wire protocol (UTF-8, LF-terminated, one response line per request line):

    SET <PWD|TOK> <user_id> <index>     ->  OK SET
    CHECK <PWD|TOK> <user_id> <index>   ->  OK TRUE | OK FALSE
    anything malformed                  ->  ERR <reason-token>
"""

from __future__ import annotations

import json
import logging
import re
import socket
import socketserver
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .errors import HoneycheckerUnavailable, ProtocolError, StorageFailure
from .storage import AppendLog

logger = logging.getLogger("twofha.honeychecker")

USER_ID_RE = re.compile(r"^[A-Za-z0-9_.-]{1,64}$")
# canonical decimal only: each command has exactly one line form
_INDEX_RE = re.compile(r"^(0|[1-9][0-9]*)$")


class Domain(str, Enum):
    """Which index a honeychecker entry guards."""

    PWD = "PWD"  # position of the real password in the sweetword list
    TOK = "TOK"  # position of the real OTP among the delivered tokens


@dataclass(frozen=True)
class AlarmEvent:
    ts: str  # UTC instant, ISO-8601
    domain: Domain
    user: str
    submitted_index: int
    expected_index_known: bool

    def to_json_dict(self) -> dict:
        return {
            "ts": self.ts,
            "domain": self.domain.value,
            "user": self.user,
            "submitted_index": self.submitted_index,
            "expected_index_known": self.expected_index_known,
        }


@dataclass(frozen=True)
class SetCommand:
    domain: Domain
    user_id: str
    index: int


@dataclass(frozen=True)
class CheckCommand:
    domain: Domain
    user_id: str
    index: int


# --- codec ---------------------------------------------------------------


def parse_line(line: bytes | str) -> SetCommand | CheckCommand:
    """Parse one request line; raises ProtocolError for anything malformed."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            raise ProtocolError("bad-encoding") from None
    line = line.rstrip("\n").rstrip("\r")
    if not line:
        raise ProtocolError("empty-line")
    fields = line.split(" ")
    verb = fields[0]
    if verb not in ("SET", "CHECK"):
        raise ProtocolError("unknown-verb")
    if len(fields) != 4 or any(not f for f in fields):
        raise ProtocolError("bad-arity")
    _, domain_s, user_id, index_s = fields
    if domain_s not in (Domain.PWD.value, Domain.TOK.value):
        raise ProtocolError("bad-domain")
    if not USER_ID_RE.match(user_id):
        raise ProtocolError("bad-user")
    if not _INDEX_RE.match(index_s):
        raise ProtocolError("bad-index")
    cls = SetCommand if verb == "SET" else CheckCommand
    return cls(domain=Domain(domain_s), user_id=user_id, index=int(index_s))


def render_response(result: bool | None) -> bytes:
    """Render a command result: True/False for Check, None for Set."""
    if result is None:
        return b"OK SET\n"
    return b"OK TRUE\n" if result else b"OK FALSE\n"


def render_error(reason: str) -> bytes:
    return f"ERR {reason}\n".encode("utf-8")


# --- stores ---------------------------------------------------------------


class MemoryIndexStore:
    """Volatile index store for tests and in-process simulation."""

    def __init__(self):
        self.entries: dict[tuple[str, str], int] = {}

    def set(self, domain: Domain, user_id: str, index: int) -> None:
        self.entries[(domain.value, user_id)] = index

    def get(self, domain: Domain, user_id: str) -> int | None:
        return self.entries.get((domain.value, user_id))

    def snapshot(self) -> dict[tuple[str, str], int]:
        return dict(self.entries)


class FileIndexStore:
    """Index store backed by an append-only log, replayed on startup."""

    def __init__(self, data_dir: str | Path, fsync: bool = True):
        self.log = AppendLog(Path(data_dir) / "hc_index.log", fsync=fsync)
        self.entries: dict[tuple[str, str], int] = {}
        for record in self.log.replay():
            self.entries[(record["domain"], record["user"])] = record["index"]

    def set(self, domain: Domain, user_id: str, index: int) -> None:
        self.log.append({"domain": domain.value, "user": user_id, "index": index})
        self.entries[(domain.value, user_id)] = index
        if self.log.should_compact(len(self.entries)):
            self.log.compact(
                {"domain": d, "user": u, "index": i}
                for (d, u), i in self.entries.items()
            )

    def get(self, domain: Domain, user_id: str) -> int | None:
        return self.entries.get((domain.value, user_id))

    def snapshot(self) -> dict[tuple[str, str], int]:
        return dict(self.entries)


class MemoryAlarmSink:
    def __init__(self):
        self.events: list[AlarmEvent] = []

    def append(self, event: AlarmEvent) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)


class FileAlarmSink:
    """JSON-lines alarm log, one event per line."""

    def __init__(self, path: str | Path):
        self.log = AppendLog(path, fsync=True)

    @property
    def path(self) -> Path:
        return self.log.path

    def append(self, event: AlarmEvent) -> None:
        self.log.append(event.to_json_dict())

    def __len__(self) -> int:
        return self.log.lines


# --- service ---------------------------------------------------------------


class HoneycheckerService:
    """Check/Set semantics plus alarm emission.

    A single lock serializes commands, which trivially gives per-key
    linearizability at desk scale.
    """

    def __init__(self, store=None, alarm_sink=None, webhook_url: str | None = None):
        self.store = store if store is not None else MemoryIndexStore()
        self.alarms = alarm_sink if alarm_sink is not None else MemoryAlarmSink()
        self.webhook_url = webhook_url
        self._lock = threading.RLock()

    def set(self, domain: Domain | str, user_id: str, index: int) -> None:
        """Map (domain, user) to index, overwriting; durable before return."""
        domain = Domain(domain)
        if index < 0:
            raise ProtocolError("bad-index")
        with self._lock:
            self.store.set(domain, user_id, index)

    def check(self, domain: Domain | str, user_id: str, index: int) -> bool:
        """True iff the stored index matches; False raises an alarm.

        An unknown user is treated as a mismatch: the login server only asks
        after a local match, so an unknown user here means the two stores
        have diverged - suspicious by itself.
        """
        domain = Domain(domain)
        with self._lock:
            stored = self.store.get(domain, user_id)
            if stored is not None and stored == index:
                return True
            event = AlarmEvent(
                ts=datetime.now(timezone.utc).isoformat(),
                domain=domain,
                user=user_id,
                submitted_index=index,
                expected_index_known=stored is not None,
            )
            self._raise_alarm(event)
            return False

    def _raise_alarm(self, event: AlarmEvent) -> None:
        try:
            self.alarms.append(event)
        except StorageFailure as exc:
            # the check response must still go out; surface the failure
            # on the operator channel instead
            logger.error("alarm log append failed: %s", exc)
        if self.webhook_url:
            self._post_webhook(event)

    def _post_webhook(self, event: AlarmEvent) -> None:
        try:
            import requests

            requests.post(self.webhook_url, json=event.to_json_dict(), timeout=5.0)
        except Exception as exc:  # alert delivery is best-effort
            logger.error("alarm webhook failed: %s", exc)

    def handle_line(self, line: bytes | str) -> bytes:
        """Full request->response cycle for one protocol line."""
        try:
            command = parse_line(line)
        except ProtocolError as exc:
            return render_error(exc.reason)
        try:
            if isinstance(command, SetCommand):
                self.set(command.domain, command.user_id, command.index)
                return render_response(None)
            return render_response(
                self.check(command.domain, command.user_id, command.index)
            )
        except ProtocolError as exc:
            return render_error(exc.reason)
        except StorageFailure:
            return render_error("storage-failure")


# --- TCP server -------------------------------------------------------------


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            self.wfile.write(self.server.service.handle_line(line))
            self.wfile.flush()


class HoneycheckerServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str, port: int, service: HoneycheckerService):
        super().__init__((host, port), _LineHandler)
        self.service = service

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[0], self.server_address[1]


def serve(
    host: str,
    port: int,
    data_dir: str | Path,
    webhook_url: str | None = None,
    fsync: bool = True,
) -> HoneycheckerServer:
    """Build a file-backed honeychecker listening on host:port."""
    data_dir = Path(data_dir)
    service = HoneycheckerService(
        store=FileIndexStore(data_dir, fsync=fsync),
        alarm_sink=FileAlarmSink(data_dir / "alarms.jsonl"),
        webhook_url=webhook_url,
    )
    return HoneycheckerServer(host, port, service)


# --- client -----------------------------------------------------------------


class HcTcpClient:
    """Line-protocol client used by the login server.

    Transport problems surface as HoneycheckerUnavailable so callers fail
    closed; one reconnect is attempted per request.
    """

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._lock = threading.Lock()
        self._sock: socket.socket | None = None
        self._rfile = None

    def _connect(self) -> None:
        self.close()
        try:
            self._sock = socket.create_connection(
                (self.host, self.port), timeout=self.timeout
            )
            self._rfile = self._sock.makefile("rb")
        except OSError as exc:
            self._sock = None
            raise HoneycheckerUnavailable(
                f"cannot reach honeychecker at {self.host}:{self.port}: {exc}"
            ) from exc

    def _roundtrip(self, request: str) -> str:
        with self._lock:
            for attempt in (0, 1):
                if self._sock is None:
                    self._connect()
                try:
                    self._sock.sendall(request.encode("utf-8"))
                    response = self._rfile.readline()
                    if response:
                        return response.decode("utf-8").rstrip("\n")
                    # server closed the connection; retry once on a new one
                    self._sock = None
                except OSError:
                    self._sock = None
                    if attempt:
                        raise HoneycheckerUnavailable(
                            f"honeychecker connection to {self.host}:{self.port} failed"
                        ) from None
            raise HoneycheckerUnavailable(
                f"honeychecker at {self.host}:{self.port} closed the connection"
            )

    def _command(self, verb: str, domain: Domain | str, user_id: str, index: int) -> str:
        domain = Domain(domain)
        response = self._roundtrip(f"{verb} {domain.value} {user_id} {index}\n")
        if response.startswith("ERR "):
            reason = response[4:]
            if reason == "storage-failure":
                raise StorageFailure("honeychecker could not persist the entry")
            raise ProtocolError(reason)
        return response

    def set(self, domain: Domain | str, user_id: str, index: int) -> None:
        response = self._command("SET", domain, user_id, index)
        if response != "OK SET":
            raise ProtocolError(f"unexpected response {response!r}")

    def check(self, domain: Domain | str, user_id: str, index: int) -> bool:
        response = self._command("CHECK", domain, user_id, index)
        if response == "OK TRUE":
            return True
        if response == "OK FALSE":
            return False
        raise ProtocolError(f"unexpected response {response!r}")

    def close(self) -> None:
        if self._rfile is not None:
            try:
                self._rfile.close()
            except OSError:
                pass
            self._rfile = None
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None

    def __enter__(self) -> "HcTcpClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def parse_alarm_log(path: str | Path) -> list[AlarmEvent]:
    """Read a JSON-lines alarm file back into events."""
    events = []
    path = Path(path)
    if not path.exists():
        return events
    with path.open("r", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            raw = json.loads(line)
            events.append(
                AlarmEvent(
                    ts=raw["ts"],
                    domain=Domain(raw["domain"]),
                    user=raw["user"],
                    submitted_index=raw["submitted_index"],
                    expected_index_known=raw["expected_index_known"],
                )
            )
    return events
