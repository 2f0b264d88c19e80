"""Network front ends for the bridge: length-prefixed JSON over TCP and
the identical message set over WebSocket.

Request envelope:  {op: set|get|subscribe|reset, key?, payload?, count?}
Response:          {ok, seq?, payload?, error?}
Subscription push: {event: "update", key, seq, payload} or
                   {event: "reset", scope}

TCP framing is a 4-byte big-endian length followed by that many bytes of
UTF-8 JSON. WebSocket carries one JSON document per text message.
"""

import asyncio
import json
import logging
import struct

from websockets.asyncio.server import serve as ws_serve

from .core import BridgeCore
from .schemas import CHANNEL_KEYS, SchemaViolation

log = logging.getLogger("deskbot.bridge")

MAX_FRAME = 16 * 1024 * 1024


def encode(msg: dict) -> bytes:
    data = json.dumps(msg, sort_keys=True, separators=(",", ":")).encode()
    return struct.pack(">I", len(data)) + data


class _Session:
    """One client connection: request dispatch plus an ordered outbox that
    carries both responses and subscription pushes."""

    def __init__(self, core: BridgeCore, name: str, push_buffer: int):
        self.core = core
        self.name = name
        self.outbox: asyncio.Queue = asyncio.Queue(maxsize=push_buffer)
        self.subs = []
        self.dead = False

    def close(self):
        for sub in self.subs:
            sub.cancel()
        self.subs.clear()
        self.dead = True

    def _push(self, event) -> None:
        if self.dead:
            return
        try:
            self.outbox.put_nowait(event.to_wire())
        except asyncio.QueueFull:
            # Slow subscriber: drop it rather than stall the bridge.
            log.warning("disconnecting %s: subscription buffer overflow",
                        self.name)
            for sub in self.subs:
                sub.cancel()
            self.subs.clear()
            while not self.outbox.empty():
                self.outbox.get_nowait()
            self.outbox.put_nowait(
                {"event": "error",
                 "error": "subscription buffer overflow; resubscribe and "
                          "re-get to resync"})
            self.outbox.put_nowait(None)  # tells the writer to hang up

    async def enqueue(self, msg) -> None:
        if not self.dead:
            await self.outbox.put(msg)

    def handle(self, msg) -> dict:
        if not isinstance(msg, dict) or "op" not in msg:
            return {"ok": False, "error": "request must be a JSON object with 'op'"}
        op = msg.get("op")
        key = msg.get("key")
        try:
            if op == "set":
                if key not in CHANNEL_KEYS:
                    return {"ok": False, "error": f"unknown key {key!r}"}
                seq = self.core.set(key, msg.get("payload"), sender=self.name)
                return {"ok": True, "seq": seq}
            if op == "get":
                if key not in CHANNEL_KEYS:
                    return {"ok": False, "error": f"unknown key {key!r}"}
                count = msg.get("count")
                result = self.core.get(key, count=count)
                if isinstance(result, list):
                    return {"ok": True,
                            "payload": [{"seq": s, "payload": p}
                                        for s, p in result]}
                if result is None:
                    return {"ok": True, "seq": 0, "payload": None}
                seq, payload = result
                return {"ok": True, "seq": seq, "payload": payload}
            if op == "subscribe":
                if key not in CHANNEL_KEYS:
                    return {"ok": False, "error": f"unknown key {key!r}"}
                self.subs.append(self.core.subscribe(key, self._push))
                return {"ok": True}
            if op == "reset":
                self.core.reset(msg.get("scope", "all"))
                return {"ok": True}
            return {"ok": False, "error": f"unknown op {op!r}"}
        except SchemaViolation as exc:
            return {"ok": False, "error": str(exc)}


class BridgeServer:
    def __init__(self, core: BridgeCore | None = None,
                 tcp_host: str = "127.0.0.1", tcp_port: int = 7780,
                 ws_host: str = "127.0.0.1", ws_port: int = 7781,
                 push_buffer: int = 4096):
        self.core = core if core is not None else BridgeCore()
        self.tcp_host, self.tcp_port = tcp_host, tcp_port
        self.ws_host, self.ws_port = ws_host, ws_port
        self.push_buffer = push_buffer
        self._tcp_server = None
        self._ws_server = None
        self._counter = 0

    async def start(self) -> None:
        self._tcp_server = await asyncio.start_server(
            self._tcp_connection, self.tcp_host, self.tcp_port)
        self.tcp_port = self._tcp_server.sockets[0].getsockname()[1]
        if self.ws_port is not None:
            self._ws_server = await ws_serve(
                self._ws_connection, self.ws_host, self.ws_port)
            self.ws_port = self._ws_server.sockets[0].getsockname()[1]
        log.info("bridge listening on tcp %s:%d ws %s:%s",
                 self.tcp_host, self.tcp_port, self.ws_host, self.ws_port)

    async def stop(self) -> None:
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    async def serve_forever(self) -> None:
        await self.start()
        try:
            await asyncio.Event().wait()
        finally:
            await self.stop()

    def _next_name(self, kind: str) -> str:
        self._counter += 1
        return f"{kind}-{self._counter}"

    async def _tcp_connection(self, reader: asyncio.StreamReader,
                              writer: asyncio.StreamWriter) -> None:
        session = _Session(self.core, self._next_name("tcp"), self.push_buffer)

        async def drain_outbox():
            while True:
                item = await session.outbox.get()
                if item is None:
                    break
                writer.write(encode(item))
                await writer.drain()

        out_task = asyncio.ensure_future(drain_outbox())
        try:
            while True:
                header = await reader.readexactly(4)
                (length,) = struct.unpack(">I", header)
                if length > MAX_FRAME:
                    break
                raw = await reader.readexactly(length)
                try:
                    msg = json.loads(raw.decode("utf-8"))
                except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                    await session.enqueue({"ok": False,
                                           "error": f"bad JSON: {exc}"})
                    continue
                await session.enqueue(session.handle(msg))
        except (asyncio.IncompleteReadError, ConnectionError):
            pass
        finally:
            session.close()
            out_task.cancel()
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def _ws_connection(self, websocket) -> None:
        session = _Session(self.core, self._next_name("ws"), self.push_buffer)

        async def drain_outbox():
            while True:
                item = await session.outbox.get()
                if item is None:
                    await websocket.close(code=1013, reason="overflow")
                    break
                await websocket.send(json.dumps(item, sort_keys=True,
                                                separators=(",", ":")))

        out_task = asyncio.ensure_future(drain_outbox())
        try:
            async for raw in websocket:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError as exc:
                    await session.enqueue({"ok": False,
                                           "error": f"bad JSON: {exc}"})
                    continue
                await session.enqueue(session.handle(msg))
        except Exception:  # connection-level errors end the session
            pass
        finally:
            session.close()
            out_task.cancel()


def run_bridge(tcp_host: str = "127.0.0.1", tcp_port: int = 7780,
               ws_host: str = "127.0.0.1", ws_port: int = 7781,
               retention: int = 1024) -> None:
    """Blocking entry point for the bridge process."""
    server = BridgeServer(BridgeCore(retention=retention),
                          tcp_host=tcp_host, tcp_port=tcp_port,
                          ws_host=ws_host, ws_port=ws_port)
    asyncio.run(server.serve_forever())
