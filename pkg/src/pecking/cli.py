"""Command-line front end.

Every subcommand goes through the HTTP service: in-process by default
(no socket), or against a running server with --url. Exit codes: 0 on
success, 1 on validation errors, 2 when verification ran and failed.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

import httpx

from . import csvout


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 (validation), keeping 2 for failed verification."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(_fail(message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pecking",
        description="hierarchy formation experiments on graphs")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON config file (flat dotted keys)")
    parser.add_argument("--seed", type=_u64, metavar="U64",
                        help="master seed, overrides the config value")
    parser.add_argument("--out", metavar="DIR", default=".",
                        help="directory for output files (default: .)")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="worker threads, overrides the config value")
    parser.add_argument("--url", metavar="URL",
                        help="base URL of a running service "
                             "(default: run in-process)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stability", help="spectral stability table over the grid")
    sub.add_parser("sweep", help="Monte Carlo sigma sweep over the grid")
    sub.add_parser("competing", help="run integer fights to termination")
    sub.add_parser("meanfield", help="mean recursion trace and identity check")
    sub.add_parser("verify", help="oracle suites; exit 2 on failure")
    plot = sub.add_parser("plot", help="render a sweep CSV as SVG")
    plot.add_argument("--rows", metavar="PATH", required=True,
                      help="sweep CSV file to plot")
    plot.add_argument("--x", metavar="AXIS", default="mu",
                      help="x axis column (default: mu)")
    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise SystemExit(_fail(f"cannot read config: {exc}"))
        except json.JSONDecodeError as exc:
            raise SystemExit(_fail(f"config is not valid JSON: {exc}"))
        if not isinstance(cfg, dict):
            raise SystemExit(_fail("config must be a JSON object"))
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    return cfg


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _post(args, path: str, payload: dict) -> dict:
    if args.url:
        resp = httpx.post(args.url.rstrip("/") + path, json=payload,
                          timeout=None)
    else:
        from .service import app

        async def call():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://pecking",
                                         timeout=None) as client:
                return await client.post(path, json=payload)

        resp = asyncio.run(call())
    if resp.status_code == 422:
        detail = resp.json().get("detail", resp.text)
        raise SystemExit(_fail(str(detail)))
    if resp.status_code >= 400:
        raise SystemExit(_fail(f"HTTP {resp.status_code}: {resp.text}"))
    return resp.json()


def _write(args, name: str, text: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn
        uvicorn.run("pecking.service:app", host=args.host, port=args.port)
        return 0
    if args.command == "plot":
        try:
            with open(args.rows, encoding="utf-8") as fh:
                header, data = csvout.parse(fh.read())
        except OSError as exc:
            return _fail(f"cannot read rows: {exc}")
        except ValueError as exc:
            return _fail(str(exc))
        rows = [dict(zip(header, row)) for row in data]
        body = _post(args, "/plot", {"rows": rows, "x_axis": args.x})
        path = _write(args, "plot.svg", body["svg"])
        print(f"wrote {path} ({len(rows)} points)")
        return 0

    config = _load_config(args)
    payload = {"config": config}
    if args.command == "stability":
        body = _post(args, "/stability", payload)
        path = _write(args, "stability.csv", body["csv"])
        print(f"wrote {path} ({len(body['rows'])} rows)")
        return 0
    if args.command == "sweep":
        body = _post(args, "/sweep", payload)
        path = _write(args, "sweep.csv", body["csv"])
        print(f"wrote {path} ({len(body['rows'])} cells)")
        return 0
    if args.command == "competing":
        body = _post(args, "/competing", payload)
        path = _write(args, "competing.csv", body["csv"])
        print(f"wrote {path} ({len(body['rows'])} runs)")
        print(json.dumps(body["summary"], sort_keys=True))
        return 0
    if args.command == "meanfield":
        body = _post(args, "/meanfield", payload)
        path = _write(args, "meanfield.csv", body["csv"])
        print(f"wrote {path} ({len(body['rows'])} samples)")
        print(json.dumps(body["extras"], sort_keys=True))
        return 0
    if args.command == "verify":
        body = _post(args, "/verify", payload)
        path = _write(args, "verify.txt", body["report"])
        print(f"wrote {path}")
        print(body["report"].rstrip().splitlines()[-1])
        return 0 if body["passed"] else 2
    return _fail(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
