"""Operator command line: run the servers, register users, tail logs, simulate attacks.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import attacksim, honeychecker, httpapi
from .config import Config, load_config
from .delivery import ChannelKind, inbox_path, open_file_sinks
from .errors import InvalidArgument, TwoFhaError
from .honeychecker import HcTcpClient
from .loginserver import FileUserStore, LoginService
from .rng import RngHandle


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twofha",
        description="Two-factor honeytoken authentication: servers, registration, attack simulation.",
    )
    parser.add_argument("--config", help="JSON config file (default: $TWOFHA_CONFIG if set)")
    sub = parser.add_subparsers(dest="command", required=True)

    serve_hc = sub.add_parser("serve-hc", help="run the honeychecker TCP server")
    serve_hc.add_argument("--host")
    serve_hc.add_argument("--port", type=int)
    serve_hc.add_argument("--data", help="honeychecker data directory")
    serve_hc.add_argument("--webhook", help="POST alarm JSON to this URL")

    serve_ls = sub.add_parser("serve-ls", help="run the login server HTTP API")
    serve_ls.add_argument("--host")
    serve_ls.add_argument("--port", type=int)
    serve_ls.add_argument("--hc-host")
    serve_ls.add_argument("--hc-port", type=int)
    serve_ls.add_argument("--data", help="login server data directory")
    serve_ls.add_argument("--inbox", help="simulated inbox directory")
    serve_ls.add_argument("--dev-inbox", action="store_true", default=None,
                          help="expose GET /dev/inbox (demo only)")
    serve_ls.add_argument("--static", help="serve this directory as static assets")
    serve_ls.add_argument("--seed", type=int, help="seed all randomness (test only)")

    register = sub.add_parser("register", help="register a user against a running login server")
    register.add_argument("--user", required=True)
    register.add_argument("--password", required=True)
    register.add_argument("--channel", choices=[c.value for c in ChannelKind], default="sms")
    register.add_argument("--ls-url", help="login server base URL (default from config)")

    simulate = sub.add_parser("simulate", help="run an attack simulation")
    sim_sub = simulate.add_subparsers(dest="scenario", required=True)
    token = sim_sub.add_parser("token-theft", help="attacker intercepts the token channel")
    token.add_argument("--n", type=int, default=3, help="tokens per challenge")
    token.add_argument("--trials", type=int, default=10_000)
    token.add_argument("--seed", type=int)
    token.add_argument("--attempts", type=int, default=1, help="guesses per trial")
    crack = sim_sub.add_parser("password-crack", help="attacker holds the inverted password file")
    crack.add_argument("--k", type=int, default=4, help="sweetwords per account")
    crack.add_argument("--trials", type=int, default=10_000)
    crack.add_argument("--seed", type=int)

    inbox = sub.add_parser("inbox", help="inspect simulated delivery inboxes")
    inbox_sub = inbox.add_subparsers(dest="action", required=True)
    inbox_tail = inbox_sub.add_parser("tail", help="print the newest inbox records")
    inbox_tail.add_argument("--kind", choices=[c.value for c in ChannelKind], default="sms")
    inbox_tail.add_argument("--dir", help="inbox directory (default from config)")
    inbox_tail.add_argument("-n", "--lines", type=int, default=10)
    inbox_tail.add_argument("--follow", action="store_true")

    alarms = sub.add_parser("alarms", help="inspect the honeychecker alarm log")
    alarms_sub = alarms.add_subparsers(dest="action", required=True)
    alarms_tail = alarms_sub.add_parser("tail", help="print the newest alarms")
    alarms_tail.add_argument("--data", help="honeychecker data directory (default from config)")
    alarms_tail.add_argument("-n", "--lines", type=int, default=10)
    alarms_tail.add_argument("--follow", action="store_true")

    return parser


def _tail_file(path: Path, lines: int, follow: bool) -> int:
    if not path.exists():
        print(f"no log at {path}", file=sys.stderr)
        return 1
    with path.open("r", encoding="utf-8") as f:
        for line in f.readlines()[-lines:]:
            sys.stdout.write(line)
        sys.stdout.flush()
        if follow:
            try:
                while True:
                    line = f.readline()
                    if line:
                        sys.stdout.write(line)
                        sys.stdout.flush()
                    else:
                        time.sleep(0.2)
            except KeyboardInterrupt:
                pass
    return 0


def _cmd_serve_hc(config: Config) -> int:
    server = honeychecker.serve(
        config.hc_host, config.hc_port, config.hc_data_dir, webhook_url=config.webhook_url
    )
    host, port = server.address
    print(f"honeychecker listening on {host}:{port} (data: {config.hc_data_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return 0


def _cmd_serve_ls(config: Config) -> int:
    hc = HcTcpClient(config.hc_host, config.hc_port)
    service = LoginService(
        hc,
        user_store=FileUserStore(config.ls_data_dir),
        sinks=open_file_sinks(config.inbox_dir),
        n=config.n,
        otp_length=config.otp_length,
        otp_alphabet=config.otp_alphabet,
        min_distance=config.min_distance,
        ttl_seconds=config.ttl_seconds,
        max_failures=config.max_failures,
        session_ttl_seconds=config.session_ttl_seconds,
        honeyword_params=config.honeyword_params(),
        hash_algorithm=config.hash_algorithm,
        hash_cost=config.hash_cost,
        rotate_token_index=config.rotate_token_index,
        qr_image_dir=config.qr_image_dir,
        rng=RngHandle(config.seed) if config.seed is not None else RngHandle.system(),
    )
    if service.health()["hc"] != "ok":
        print(
            f"error: honeychecker unreachable at {config.hc_host}:{config.hc_port}",
            file=sys.stderr,
        )
        return 1
    server = httpapi.make_api_server(
        service,
        host=config.ls_host,
        port=config.ls_port,
        dev_inbox=config.dev_inbox,
        static_dir=config.static_dir,
    )
    print(
        f"login server listening on {config.ls_host}:{server.port} "
        f"(hc: {config.hc_host}:{config.hc_port}, data: {config.ls_data_dir})",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return 0


def _cmd_register(config: Config, args: argparse.Namespace) -> int:
    import requests

    base = args.ls_url or f"http://{config.ls_host}:{config.ls_port}"
    url = f"{base.rstrip('/')}/register"
    try:
        response = requests.post(
            url,
            json={"username": args.user, "password": args.password, "channel": args.channel},
            timeout=10,
        )
    except requests.RequestException as exc:
        print(f"error: login server unreachable at {url}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(response.json(), indent=2))
    if response.status_code != 200:
        return 1
    print(
        "note: m_index is shown exactly once; it is the position of the real "
        "code in every future login.",
        file=sys.stderr,
    )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.scenario == "token-theft":
        stats = attacksim.simulate_token_theft(
            n=args.n, trials=args.trials, seed=args.seed, attempts_per_trial=args.attempts
        )
    else:
        stats = attacksim.simulate_password_crack(k=args.k, trials=args.trials, seed=args.seed)
    print(json.dumps(stats.to_json_dict(), indent=2))
    print(stats.summary_table(), file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    overrides = {
        "serve-hc": {
            "hc_host": getattr(args, "host", None),
            "hc_port": getattr(args, "port", None),
            "hc_data_dir": getattr(args, "data", None),
            "webhook_url": getattr(args, "webhook", None),
        },
        "serve-ls": {
            "ls_host": getattr(args, "host", None),
            "ls_port": getattr(args, "port", None),
            "hc_host": getattr(args, "hc_host", None),
            "hc_port": getattr(args, "hc_port", None),
            "ls_data_dir": getattr(args, "data", None),
            "inbox_dir": getattr(args, "inbox", None),
            "dev_inbox": getattr(args, "dev_inbox", None),
            "static_dir": getattr(args, "static", None),
            "seed": getattr(args, "seed", None),
        },
    }.get(args.command, {})

    try:
        config = load_config(args.config, overrides)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "serve-hc":
            return _cmd_serve_hc(config)
        if args.command == "serve-ls":
            return _cmd_serve_ls(config)
        if args.command == "register":
            return _cmd_register(config, args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "inbox":
            directory = Path(args.dir or config.inbox_dir)
            return _tail_file(inbox_path(directory, ChannelKind(args.kind)), args.lines, args.follow)
        if args.command == "alarms":
            directory = Path(args.data or config.hc_data_dir)
            return _tail_file(directory / "alarms.jsonl", args.lines, args.follow)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TwoFhaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
