"""Command-line clients: `swipt-solve` runs sweeps, `swipt-serve` hosts the API.

`swipt-solve` is a thin client of the HTTP service. Without --server it
mounts the FastAPI app in process (no network involved), so results are
reproducible offline; with --server it talks to a running deployment
instead.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, replace
from pathlib import Path

import httpx

from .experiments import (
    CANONICAL_SWEEPS,
    SWEEP_P,
    SWEEP_P_X_D1,
    ConfigError,
    ResultRow,
    aggregate,
    format_aggregate_table,
    parse_config,
    write_csv,
)


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .api import app  # deferred: keeps --help fast

    return httpx.Client(
        transport=httpx.ASGITransport(app=app),
        base_url="http://swiptjam.internal",
        timeout=None,
    )


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="swipt-solve",
        description="Run secrecy-rate power-allocation experiments and write a CSV.",
    )
    ap.add_argument("--config", type=Path, help="flat key = value config document")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--trials", type=int, help="override the config trial count")
    ap.add_argument("--out", type=Path, default=Path("results.csv"))
    ap.add_argument(
        "--sweep",
        choices=("qbar", "p", "d1", "p_x_d1"),
        help="sweep selector; uses the canonical grid for that sweep",
    )
    ap.add_argument("--server", help="base URL of a running service (default: in process)")
    args = ap.parse_args(argv)

    try:
        text = args.config.read_text() if args.config else ""
    except OSError as exc:
        print(f"swipt-solve: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
        if args.sweep:
            grid_key = SWEEP_P if args.sweep == SWEEP_P_X_D1 else args.sweep
            cfg = replace(
                cfg,
                sweep=args.sweep,
                sweep_values=CANONICAL_SWEEPS[grid_key],
                sweep_values_2=(),
            )
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.trials is not None:
            cfg = replace(cfg, trials=args.trials)
    except ConfigError as exc:
        print(f"swipt-solve: config error: {exc}", file=sys.stderr)
        return 2

    payload = asdict(cfg)
    with _client(args.server) as client:
        resp = client.post("/experiment", json=payload)
        if resp.status_code in (400, 422):
            print(f"swipt-solve: config rejected: {resp.text}", file=sys.stderr)
            return 2
        resp.raise_for_status()
        data = resp.json()

    rows = [ResultRow(**rec) for rec in data["rows"]]
    write_csv(rows, args.out)
    print(format_aggregate_table(aggregate(rows)))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def serve(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="swipt-serve", description="Host the solver service.")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8000)
    args = ap.parse_args(argv)
    import uvicorn

    uvicorn.run("swiptjam.api:app", host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
