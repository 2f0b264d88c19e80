"""Blocking TCP client for the bridge protocol.

A background thread reads frames and sorts them into responses (answers to
requests, strictly in request order) and pushes (subscription traffic),
which callers drain with poll_updates()/next_update().
"""

import json
import queue
import socket
import struct
import threading


class BridgeError(RuntimeError):
    pass


class BridgeClient:
    def __init__(self, host: str = "127.0.0.1", port: int = 7780,
                 timeout: float = 10.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._responses: queue.Queue = queue.Queue()
        self._updates: queue.Queue = queue.Queue()
        self._reader: threading.Thread | None = None
        self._req_lock = threading.Lock()

    # -- connection ---------------------------------------------------------

    def connect(self) -> "BridgeClient":
        self._sock = socket.create_connection((self.host, self.port),
                                              timeout=self.timeout)
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        return self

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()
            self._sock = None

    def __enter__(self):
        return self.connect()

    def __exit__(self, *exc):
        self.close()

    def _read_loop(self) -> None:
        try:
            while True:
                header = self._recv_exact(4)
                (length,) = struct.unpack(">I", header)
                msg = json.loads(self._recv_exact(length).decode("utf-8"))
                if "event" in msg:
                    self._updates.put(msg)
                else:
                    self._responses.put(msg)
        except (ConnectionError, OSError, json.JSONDecodeError):
            self._responses.put(None)
            self._updates.put(None)

    def _recv_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = self._sock.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("bridge closed the connection")
            buf.extend(chunk)
        return bytes(buf)

    def _request(self, msg: dict) -> dict:
        if self._sock is None:
            raise BridgeError("not connected")
        with self._req_lock:
            data = json.dumps(msg, sort_keys=True,
                              separators=(",", ":")).encode()
            self._sock.sendall(struct.pack(">I", len(data)) + data)
            reply = self._responses.get(timeout=self.timeout)
        if reply is None:
            raise BridgeError("connection lost")
        if not reply.get("ok"):
            raise BridgeError(reply.get("error", "request failed"))
        return reply

    # -- protocol operations ------------------------------------------------

    def set(self, key: str, payload: dict) -> int:
        return self._request({"op": "set", "key": key, "payload": payload})["seq"]

    def get(self, key: str, count: int | None = None):
        msg = {"op": "get", "key": key}
        if count is not None:
            msg["count"] = count
        return self._request(msg).get("payload")

    def subscribe(self, key: str) -> None:
        self._request({"op": "subscribe", "key": key})

    def reset(self) -> None:
        self._request({"op": "reset", "scope": "all"})

    # -- subscription traffic ------------------------------------------------

    def next_update(self, timeout: float | None = None) -> dict | None:
        """The next push, or None on timeout / connection loss."""
        try:
            return self._updates.get(timeout=timeout)
        except queue.Empty:
            return None

    def poll_updates(self) -> list[dict]:
        out = []
        while True:
            try:
                item = self._updates.get_nowait()
            except queue.Empty:
                return out
            if item is not None:
                out.append(item)
