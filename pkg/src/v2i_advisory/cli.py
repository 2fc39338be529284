"""Command-line entry point: codec tools, config validation, runs, metrics, serve.

Exit codes: 0 success, 2 any domain error (bad frame, bad config, bad log),
1 internal fault.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import sim as simmod
from .advisory_engine import AdvisoryParams
from .geo_zone import GeoZoneError, ValidationError, load_zone_config
from .sim import ConfigError, LinkConfig, MalformedLog, Simulation, compute_metrics, load_scenario
from .spat_codec import (
    FrameFormat,
    SpatCodecError,
    decode_m60,
    decode_tw900,
    detect_format,
    encode_m60,
    encode_tw900,
    snapshot_from_dict,
    snapshot_to_dict,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_DOMAIN = 2


class BadHexDigit(ValueError):
    pass


class CliError(Exception):
    """Domain-level failure; message goes to stderr, exit code 2."""


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _parse_hex(text: str) -> bytes:
    out = bytearray()
    for token in text.split():
        if len(token) % 2 != 0 or not all(c in "0123456789abcdefABCDEF" for c in token):
            raise BadHexDigit(f"not a hex octet sequence: {token!r}")
        out += bytes.fromhex(token)
    return bytes(out)


def _format_hex(data: bytes) -> str:
    return data.hex(" ").upper()


def cmd_decode(args: argparse.Namespace) -> int:
    try:
        data = _parse_hex(_read_text(args.hex))
        if args.format == "auto":
            tag = detect_format(data)
            if tag is FrameFormat.UNKNOWN:
                raise CliError(f"unrecognized frame: {len(data)} octets, no known magic")
        else:
            tag = FrameFormat.M60_LIKE if args.format == "m60" else FrameFormat.TW900_LIKE
        snapshot = decode_m60(data) if tag is FrameFormat.M60_LIKE else decode_tw900(data)
    except (BadHexDigit, SpatCodecError, OSError) as exc:
        raise CliError(str(exc)) from None
    print(json.dumps(snapshot_to_dict(snapshot)))
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(_read_text(args.json))
        snapshot = snapshot_from_dict(doc)
        data = encode_m60(snapshot) if args.format == "m60" else encode_tw900(snapshot)
    except (json.JSONDecodeError, ValueError, OSError) as exc:
        raise CliError(str(exc)) from None
    print(_format_hex(data))
    return EXIT_OK


def cmd_validate_config(args: argparse.Namespace) -> int:
    try:
        cfg = load_zone_config(_read_text(args.config))
    except ValidationError as exc:
        for issue in exc.issues:
            print(issue, file=sys.stderr)
        return EXIT_DOMAIN
    except (GeoZoneError, OSError) as exc:
        raise CliError(str(exc)) from None
    print(json.dumps({
        "ok": True,
        "intersection_id": cfg.intersection_id,
        "zones": len(cfg.zones),
        "cycle_ds": cfg.plan.cycle_ds,
    }))
    return EXIT_OK


def _parse_latency(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        return (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise CliError(f"latency must be TICKS or MIN:MAX, got {text!r}") from None


def _load_run_inputs(args: argparse.Namespace):
    try:
        cfg = load_zone_config(_read_text(args.config))
        scenario = load_scenario(_read_text(args.scenario))
        lo, hi = _parse_latency(args.latency)
        link = LinkConfig(drop_prob=args.drop, latency_min_ticks=lo, latency_max_ticks=hi, seed=args.seed)
    except (GeoZoneError, ConfigError, ValueError, OSError) as exc:
        raise CliError(str(exc)) from None
    return cfg, scenario, link


def cmd_run(args: argparse.Namespace) -> int:
    cfg, scenario, link = _load_run_inputs(args)
    try:
        events = simmod.run_scenario(cfg, scenario, link)
    except ConfigError as exc:
        raise CliError(str(exc)) from None
    Path(args.out).write_text(simmod.write_events_jsonl(events), encoding="utf-8")
    print(json.dumps(compute_metrics(events).to_dict()))
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    try:
        events = simmod.read_events_jsonl(_read_text(args.events))
        report = compute_metrics(events)
    except (MalformedLog, OSError) as exc:
        raise CliError(str(exc)) from None
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from . import serve as servemod

    cfg, scenario, link = _load_run_inputs(args)
    if scenario.driver != simmod.DRIVER_EXTERNAL:
        raise CliError("serve requires a scenario with driver type 'external'")
    try:
        Simulation(cfg, scenario, link)  # surface config problems before binding
    except ConfigError as exc:
        raise CliError(str(exc)) from None
    server = servemod.LiveServer(
        make_sim=lambda: Simulation(cfg, scenario, link),
        config_digest=servemod.config_digest(_read_text(args.config)),
        tick_ms=args.tick_ms,
        host=args.host,
        port=args.port,
    )
    print(f"serving ws://{args.host}:{args.port} at {args.tick_ms} ms/tick", file=sys.stderr)
    server.run_forever()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2i-advisory",
        description="SPaT codec tools and the intersection approach advisory simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode a raw frame from hex to snapshot JSON")
    p.add_argument("--format", choices=["auto", "m60", "tw900"], default="auto")
    p.add_argument("--hex", required=True, help="file of whitespace-separated hex octets, or -")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("encode", help="encode snapshot JSON to a raw frame in hex")
    p.add_argument("--format", choices=["m60", "tw900"], required=True)
    p.add_argument("--json", required=True, help="snapshot JSON file, or -")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("validate-config", help="validate a zone-setup config document")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate_config)

    def add_run_args(p):
        p.add_argument("--config", required=True)
        p.add_argument("--scenario", required=True)
        p.add_argument("--drop", type=float, default=0.0, help="packet drop probability")
        p.add_argument("--latency", default="0", help="delivery latency ticks: N or MIN:MAX")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("run", help="run a scenario headless and write the event log")
    add_run_args(p)
    p.add_argument("--out", required=True, help="event log output path (JSONL)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("metrics", help="recompute the metrics report from an event log")
    p.add_argument("events")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", help="run in real time with the live WebSocket protocol")
    add_run_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--tick-ms", type=int, default=100)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
