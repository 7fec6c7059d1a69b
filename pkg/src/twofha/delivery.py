"""Out-of-band token delivery: SMS text, QR payloads, simulated channels.

Channels are simulated as append-only JSON-lines inbox files (or in-memory
lists for tests and simulations); a real gateway is out of scope. The SMS
body format is a fixed contract:

    2FHA codes: OTP: <c0> OTP1: <c1> ... OTP{n-1}: <c{n-1}>
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import InvalidArgument, RenderFailure, SinkUnavailable

SMS_PREFIX = "2FHA codes:"

_SMS_BODY_RE = re.compile(
    r"^2FHA codes: OTP: (?P<first>\S+)(?P<rest>( OTP[1-9][0-9]*: \S+)*)$"
)
_SMS_TAIL_RE = re.compile(r" OTP(?P<k>[1-9][0-9]*): (?P<code>\S+)")


@dataclass(frozen=True)
class SmsMessage:
    recipient: str
    body: str


@dataclass(frozen=True)
class QrPayload:
    """One QR code's content: the bare OTP string plus its display label.

    The encoded text is exactly the code the user would type - no URI
    wrapper, no username, no position hint.
    """

    label: str
    text: str


class ChannelKind(str, Enum):
    SMS = "sms"
    EMAIL = "email"
    CALL = "call"


def otp_label(i: int) -> str:
    """Position labels: OTP, OTP1, OTP2, ..."""
    return "OTP" if i == 0 else f"OTP{i}"


def render_sms(codes: list[str] | tuple[str, ...]) -> str:
    """Render the single-line SMS body carrying all n codes in list order."""
    if not codes:
        raise InvalidArgument("at least one code is required")
    parts = [SMS_PREFIX] + [f"{otp_label(i)}: {code}" for i, code in enumerate(codes)]
    return " ".join(parts)


def parse_sms(body: str) -> list[str]:
    """Recover the code list from an SMS body (inverse of render_sms)."""
    match = _SMS_BODY_RE.match(body)
    if not match:
        raise InvalidArgument(f"not a valid 2FHA SMS body: {body!r}")
    codes = [match.group("first")]
    expected_k = 1
    for tail in _SMS_TAIL_RE.finditer(match.group("rest")):
        if int(tail.group("k")) != expected_k:
            raise InvalidArgument(f"non-ascending OTP labels in body: {body!r}")
        codes.append(tail.group("code"))
        expected_k += 1
    return codes


def make_qr_payloads(codes: list[str] | tuple[str, ...]) -> list[QrPayload]:
    """One payload per code, order preserved, text = the bare code."""
    if not codes:
        raise InvalidArgument("at least one code is required")
    return [QrPayload(label=otp_label(i), text=code) for i, code in enumerate(codes)]


# --- sinks -------------------------------------------------------------------


@dataclass(frozen=True)
class DeliveryReceipt:
    kind: ChannelKind
    offset: int


class MemorySink:
    """In-memory inbox for tests and attack simulations."""

    def __init__(self, kind: ChannelKind):
        self.kind = kind
        self.records: list[dict] = []

    def deliver(self, message: SmsMessage) -> DeliveryReceipt:
        self.records.append(
            {
                "ts": time.time(),
                "kind": self.kind.value,
                "recipient": message.recipient,
                "body": message.body,
            }
        )
        return DeliveryReceipt(kind=self.kind, offset=len(self.records) - 1)


class FileSink:
    """Append-only JSON-lines inbox file; one record per delivery."""

    def __init__(self, kind: ChannelKind, path: str | Path):
        self.kind = kind
        self.path = Path(path)
        self._lock = threading.Lock()
        self._offset = 0
        if self.path.exists():
            with self.path.open("rb") as f:
                self._offset = sum(1 for _ in f)

    def deliver(self, message: SmsMessage) -> DeliveryReceipt:
        record = {
            "ts": time.time(),
            "kind": self.kind.value,
            "recipient": message.recipient,
            "body": message.body,
        }
        # build the full line before touching the file: no partial writes
        line = json.dumps(record, separators=(",", ":"), sort_keys=True) + "\n"
        with self._lock:
            try:
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(line)
                    f.flush()
            except OSError as exc:
                raise SinkUnavailable(f"cannot write inbox {self.path}: {exc}") from exc
            offset = self._offset
            self._offset += 1
        return DeliveryReceipt(kind=self.kind, offset=offset)


def inbox_path(inbox_dir: str | Path, kind: ChannelKind) -> Path:
    return Path(inbox_dir) / f"{kind.value}_inbox.jsonl"


def open_file_sinks(inbox_dir: str | Path) -> dict[ChannelKind, FileSink]:
    """One sink per channel kind, files named <kind>_inbox.jsonl."""
    inbox_dir = Path(inbox_dir)
    try:
        inbox_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SinkUnavailable(f"cannot create inbox dir {inbox_dir}: {exc}") from exc
    return {kind: FileSink(kind, inbox_path(inbox_dir, kind)) for kind in ChannelKind}


def open_memory_sinks() -> dict[ChannelKind, MemorySink]:
    return {kind: MemorySink(kind) for kind in ChannelKind}


def deliver(message: SmsMessage, sink) -> DeliveryReceipt:
    """Append exactly one record for the message to the sink."""
    return sink.deliver(message)


# --- optional QR image rendering ---------------------------------------------


def render_qr_pngs(
    payloads: list[QrPayload],
    out_dir: str | Path,
    challenge_id: str,
    scale: int = 8,
    border_modules: int = 4,
) -> list[Path]:
    """Write one PNG per payload, named <challenge_id>_<label>.png.

    Image mode is optional; raises RenderFailure when the imaging backend
    is missing or encoding fails. The encoded content is exactly the
    payload text.
    """
    try:
        import cv2
        import numpy as np
    except ImportError as exc:
        raise RenderFailure(
            "QR image rendering needs opencv (install the 'qr' extra)"
        ) from exc

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    encoder = cv2.QRCodeEncoder.create()
    for payload in payloads:
        try:
            # encode() already returns an image matrix: 0 = dark, 255 = light
            image = encoder.encode(payload.text)
            image = np.kron(image, np.ones((scale, scale), dtype=np.uint8))
            pad = border_modules * scale
            image = cv2.copyMakeBorder(
                image, pad, pad, pad, pad, cv2.BORDER_CONSTANT, value=255
            )
            path = out_dir / f"{challenge_id}_{payload.label}.png"
            if not cv2.imwrite(str(path), image):
                raise RenderFailure(f"could not write {path}")
        except RenderFailure:
            raise
        except Exception as exc:
            raise RenderFailure(f"QR encode failed for {payload.label}: {exc}") from exc
        paths.append(path)
    return paths
