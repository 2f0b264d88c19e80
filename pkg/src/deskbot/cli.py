"""Command-line entry points: bridge server, live robot, scripted scenario
runs, and a bridge reset utility. One binary, four subcommands."""

import argparse
import logging
import sys
import time
from dataclasses import fields

from .bridge import BridgeClient, BridgeError
from .bridge.server import run_bridge
from .config import RunConfig
from .controller import RobotController, TcpLink
from .scenario import ScriptError, load_script, run_scenario
from .world import WorldFileError, load_world

log = logging.getLogger("deskbot")


def _host_port(value: str) -> tuple[str, int]:
    host, sep, port = value.rpartition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {value!r}")
    try:
        return (host or "127.0.0.1", int(port))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad port in {value!r}") from None


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run configuration")
    for f in fields(RunConfig):
        group.add_argument(f"--{f.name.replace('_', '-')}",
                           dest=f"cfg_{f.name}", type=type(f.default),
                           default=None, metavar=str(f.default),
                           help=f"override {f.name} (default %(metavar)s)")


def _config_from(args: argparse.Namespace) -> RunConfig:
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f"cfg_{f.name}", None)
        if value is not None:
            overrides[f.name] = value
    return RunConfig(**overrides)


def _cmd_bridge(args) -> int:
    tcp_host, tcp_port = args.listen
    ws_host, ws_port = args.ws
    try:
        run_bridge(tcp_host=tcp_host, tcp_port=tcp_port, ws_host=ws_host,
                   ws_port=ws_port, retention=args.retention)
    except OSError as exc:
        print(f"bridge startup failed: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


def _connect_with_retry(host: str, port: int, attempts: int = 10,
                        delay: float = 0.5) -> BridgeClient:
    last = None
    for _ in range(attempts):
        try:
            return BridgeClient(host=host, port=port).connect()
        except OSError as exc:
            last = exc
            time.sleep(delay)
    raise BridgeError(f"bridge at {host}:{port} unreachable: {last}")


def _cmd_robot(args) -> int:
    try:
        world = load_world(args.world)
    except (OSError, WorldFileError) as exc:
        print(f"world file error: {exc}", file=sys.stderr)
        return 1
    config = _config_from(args)
    try:
        client = _connect_with_retry(*args.bridge)
    except BridgeError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    controller = RobotController(world, config, TcpLink(client))
    controller.start()
    log.info("robot running; world=%s tick=%.0f ms", args.world,
             config.dt * 1000)
    try:
        while True:
            started = time.perf_counter()
            controller.tick()
            leftover = config.dt - (time.perf_counter() - started)
            if leftover > 0:
                time.sleep(leftover)
    except KeyboardInterrupt:
        return 0
    except BridgeError as exc:
        print(f"bridge connection lost: {exc}", file=sys.stderr)
        return 1
    finally:
        client.close()


def _cmd_scenario(args) -> int:
    try:
        world = load_world(args.world)
        steps = load_script(args.script)
    except (OSError, WorldFileError, ScriptError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    config = _config_from(args)
    result = run_scenario(world, config, steps,
                          timeout_ticks=args.timeout_ticks)
    text = result.transcript_text()
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for failure in result.failures:
        print(f"FAIL {failure}", file=sys.stderr)
    print(f"scenario {'PASSED' if result.ok else 'FAILED'} "
          f"after {result.final_tick} ticks", file=sys.stderr)
    return 0 if result.ok else 1


def _cmd_reset(args) -> int:
    try:
        with BridgeClient(*args.bridge) as client:
            client.reset()
    except (OSError, BridgeError) as exc:
        print(f"reset failed: {exc}", file=sys.stderr)
        return 1
    print("bridge reset")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deskbot",
        description="Desk-scale teleoperated mapping robot stack")
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bridge", help="run the key-value bridge server")
    p.add_argument("--listen", type=_host_port, default=("127.0.0.1", 7780),
                   metavar="HOST:PORT", help="TCP listen address")
    p.add_argument("--ws", type=_host_port, default=("127.0.0.1", 7781),
                   metavar="HOST:PORT", help="WebSocket listen address")
    p.add_argument("--retention", type=int, default=1024,
                   help="events retained per stream key")
    p.set_defaults(func=_cmd_bridge)

    p = sub.add_parser("robot", help="run the simulated robot against a bridge")
    p.add_argument("--world", required=True, help="world file path")
    p.add_argument("--bridge", type=_host_port, default=("127.0.0.1", 7780),
                   metavar="HOST:PORT")
    _add_config_args(p)
    p.set_defaults(func=_cmd_robot)

    p = sub.add_parser("scenario", help="run a scripted headless scenario")
    p.add_argument("--world", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--transcript", help="write channel transcript to this file")
    p.add_argument("--timeout-ticks", type=int, default=6000)
    _add_config_args(p)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("reset", help="clear all bridge keys")
    p.add_argument("--bridge", type=_host_port, default=("127.0.0.1", 7780),
                   metavar="HOST:PORT")
    p.set_defaults(func=_cmd_reset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
