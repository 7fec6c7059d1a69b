import json

import pytest

from twofha.core import generate_otp_set
from twofha.delivery import (
    ChannelKind,
    FileSink,
    MemorySink,
    QrPayload,
    SmsMessage,
    deliver,
    inbox_path,
    make_qr_payloads,
    open_file_sinks,
    parse_sms,
    render_qr_pngs,
    render_sms,
)
from twofha.errors import InvalidArgument, SinkUnavailable
from twofha.rng import RngHandle

from oracles import parse_sms_oracle


def test_three_code_body_is_bit_exact():
    body = render_sms(["111111", "222222", "333333"])
    assert body == "2FHA codes: OTP: 111111 OTP1: 222222 OTP2: 333333"


def test_single_code_body():
    assert render_sms(["999999"]) == "2FHA codes: OTP: 999999"


def test_render_requires_codes():
    with pytest.raises(InvalidArgument):
        render_sms([])


@pytest.mark.parametrize("n", range(1, 11))
def test_round_trip_never_reorders_or_truncates(n):
    otps = generate_otp_set(RngHandle.seeded(n), n=n, length=6, min_distance=3)
    body = render_sms(list(otps.codes))
    assert parse_sms_oracle(body) == list(otps.codes)
    assert parse_sms(body) == list(otps.codes)


@pytest.mark.parametrize(
    "body",
    [
        "",
        "hello",
        "2FHA codes: OTP 111111",
        "2FHA codes: OTP: 111111 OTP2: 222222",  # skips OTP1
        "2FHA codes: OTP: 111111 OTP1: 222222 OTP1: 333333",  # repeats
        "2fha codes: OTP: 111111",
    ],
)
def test_parse_rejects_malformed_bodies(body):
    with pytest.raises(InvalidArgument):
        parse_sms(body)


def test_qr_payload_labels_and_order():
    payloads = make_qr_payloads(["483920", "117788", "902341"])
    assert [p.label for p in payloads] == ["OTP", "OTP1", "OTP2"]
    assert [p.text for p in payloads] == ["483920", "117788", "902341"]


def test_single_qr_payload():
    (payload,) = make_qr_payloads(["555555"])
    assert payload.label == "OTP"
    assert payload.text == "555555"


def test_payload_text_is_the_bare_code():
    payloads = make_qr_payloads(["740238", "552901"])
    for payload in payloads:
        assert payload.text.isdigit()
        assert payload.label not in payload.text


# --- sinks ---------------------------------------------------------------------


def test_file_sink_appends_one_record(tmp_path):
    sinks = open_file_sinks(tmp_path)
    receipt = deliver(SmsMessage("alice", "2FHA codes: OTP: 123456"), sinks[ChannelKind.SMS])
    assert receipt.offset == 0
    path = inbox_path(tmp_path, ChannelKind.SMS)
    assert path.name == "sms_inbox.jsonl"
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert set(record) == {"ts", "kind", "recipient", "body"}
    assert record["kind"] == "sms"
    assert record["recipient"] == "alice"
    assert record["body"] == "2FHA codes: OTP: 123456"


def test_call_sink_carries_same_text(tmp_path):
    sinks = open_file_sinks(tmp_path)
    body = render_sms(["111111", "222222", "333333"])
    deliver(SmsMessage("bob", body), sinks[ChannelKind.CALL])
    record = json.loads(inbox_path(tmp_path, ChannelKind.CALL).read_text())
    assert record["kind"] == "call"
    assert record["body"] == body


def test_offsets_increment(tmp_path):
    sink = FileSink(ChannelKind.EMAIL, tmp_path / "email_inbox.jsonl")
    first = sink.deliver(SmsMessage("a", "x"))
    second = sink.deliver(SmsMessage("a", "y"))
    assert (first.offset, second.offset) == (0, 1)
    # offsets continue across reopen
    reopened = FileSink(ChannelKind.EMAIL, tmp_path / "email_inbox.jsonl")
    assert reopened.deliver(SmsMessage("a", "z")).offset == 2


def test_memory_sink():
    sink = MemorySink(ChannelKind.SMS)
    deliver(SmsMessage("a", "body"), sink)
    assert len(sink.records) == 1
    assert sink.records[0]["body"] == "body"


def test_unwritable_sink_raises_without_partial_write(tmp_path):
    # parent directory missing: the open itself fails, nothing is written
    path = tmp_path / "missing" / "sub" / "sms_inbox.jsonl"
    sink = FileSink(ChannelKind.SMS, path)
    with pytest.raises(SinkUnavailable):
        sink.deliver(SmsMessage("a", "b"))
    assert not path.exists()


# --- QR images --------------------------------------------------------------------


def test_qr_images_decode_to_payload_text(tmp_path):
    cv2 = pytest.importorskip("cv2")
    payloads = make_qr_payloads(["614208", "990154", "327761"])
    paths = render_qr_pngs(payloads, tmp_path, challenge_id="chal42")
    assert [p.name for p in paths] == [
        "chal42_OTP.png",
        "chal42_OTP1.png",
        "chal42_OTP2.png",
    ]
    detector = cv2.QRCodeDetector()
    for payload, path in zip(payloads, paths):
        decoded, _, _ = detector.detectAndDecode(cv2.imread(str(path)))
        assert decoded == payload.text
