import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest
import requests

CLI = [sys.executable, "-m", "twofha"]


def _run(*args, **kwargs):
    return subprocess.run(
        [*CLI, *args], capture_output=True, text=True, timeout=120, **kwargs
    )


def _wait_ready(process, timeout=15.0) -> str:
    line = ""
    deadline = time.time() + timeout
    while time.time() < deadline:
        line = process.stdout.readline()
        if "listening on" in line:
            return line
        if process.poll() is not None:
            break
        time.sleep(0.01)
    raise AssertionError(f"server did not become ready: {line!r}")


def _port_from_ready_line(line: str) -> int:
    return int(line.split("listening on ")[1].split()[0].rsplit(":", 1)[1])


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_no_arguments_is_usage_error():
    result = _run()
    assert result.returncode == 2


def test_unknown_subcommand_is_usage_error():
    result = _run("frobnicate")
    assert result.returncode == 2


def test_invalid_config_file(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"n": 0}))
    result = _run("--config", str(config), "simulate", "token-theft", "--trials", "5")
    assert result.returncode == 2
    assert "n must be >= 1" in result.stderr


def test_unknown_config_key(tmp_path):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"tokens": 3}))
    result = _run("--config", str(config), "simulate", "token-theft", "--trials", "5")
    assert result.returncode == 2
    assert "unknown config keys" in result.stderr


def test_simulate_token_theft_json_output():
    result = _run(
        "simulate", "token-theft", "--n", "3", "--trials", "300", "--seed", "7"
    )
    assert result.returncode == 0, result.stderr
    doc = json.loads(result.stdout)
    assert doc["scenario"] == "token-theft"
    assert doc["n"] == 3
    assert doc["trials"] == 300
    assert doc["seed"] == 7
    assert "detection rate" in result.stderr  # summary table on stderr


def test_simulate_is_reproducible():
    a = _run("simulate", "password-crack", "--k", "4", "--trials", "200", "--seed", "3")
    b = _run("simulate", "password-crack", "--k", "4", "--trials", "200", "--seed", "3")
    assert a.returncode == b.returncode == 0
    assert json.loads(a.stdout) == json.loads(b.stdout)


def test_register_with_ls_down():
    port = _free_port()
    result = _run("register", "--user", "alice", "--password", "pw1234",
                  "--ls-url", f"http://127.0.0.1:{port}")
    assert result.returncode == 1
    assert f"127.0.0.1:{port}" in result.stderr
    assert "unreachable" in result.stderr


def test_inbox_tail_missing_file(tmp_path):
    result = _run("inbox", "tail", "--dir", str(tmp_path))
    assert result.returncode == 1
    assert "no log at" in result.stderr


def test_inbox_tail_prints_last_lines(tmp_path):
    inbox = tmp_path / "sms_inbox.jsonl"
    inbox.write_text("".join(f'{{"body":"msg{i}"}}\n' for i in range(20)))
    result = _run("inbox", "tail", "--dir", str(tmp_path), "-n", "3")
    assert result.returncode == 0
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 3
    assert json.loads(lines[-1])["body"] == "msg19"


def test_alarms_tail(tmp_path):
    (tmp_path / "alarms.jsonl").write_text('{"user":"eve"}\n')
    result = _run("alarms", "tail", "--data", str(tmp_path))
    assert result.returncode == 0
    assert "eve" in result.stdout


@pytest.fixture
def live_stack(tmp_path):
    """serve-hc and serve-ls as real subprocesses on ephemeral ports."""
    hc_proc = subprocess.Popen(
        [*CLI, "serve-hc", "--port", "0", "--data", str(tmp_path / "hc")],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    processes = [hc_proc]
    try:
        hc_port = _port_from_ready_line(_wait_ready(hc_proc))
        ls_port = _free_port()
        ls_proc = subprocess.Popen(
            [
                *CLI, "serve-ls",
                "--port", str(ls_port),
                "--hc-port", str(hc_port),
                "--data", str(tmp_path / "ls"),
                "--inbox", str(tmp_path / "inbox"),
                "--dev-inbox",
            ],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
        )
        processes.append(ls_proc)
        _wait_ready(ls_proc)
        yield f"http://127.0.0.1:{ls_port}", tmp_path
    finally:
        for proc in processes:
            proc.terminate()
        for proc in processes:
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()


def test_serve_register_and_full_login(live_stack):
    base, tmp_path = live_stack
    result = _run("register", "--user", "walter", "--password", "jesse1234",
                  "--ls-url", base)
    assert result.returncode == 0, result.stderr
    receipt = json.loads(result.stdout)
    assert receipt["username"] == "walter"
    m = receipt["m_index"]

    challenge = requests.post(
        f"{base}/login", json={"username": "walter", "password": "jesse1234"}, timeout=5
    ).json()
    otp = challenge["qr_payloads"][m]["text"]
    verified = requests.post(
        f"{base}/verify",
        json={"challenge_id": challenge["challenge_id"], "otp": otp},
        timeout=5,
    )
    assert verified.status_code == 200

    # the inbox tail shows the delivered SMS
    result = _run("inbox", "tail", "--dir", str(tmp_path / "inbox"))
    assert result.returncode == 0
    assert "2FHA codes: OTP:" in result.stdout


def test_serve_ls_refuses_to_start_without_hc(tmp_path):
    port = _free_port()
    result = _run(
        "serve-ls",
        "--port", str(_free_port()),
        "--hc-port", str(port),
        "--data", str(tmp_path / "ls"),
        "--inbox", str(tmp_path / "inbox"),
    )
    assert result.returncode == 1
    assert "honeychecker unreachable" in result.stderr
