"""Transport-agnostic key-value store with per-key ordering and fan-out.

The core is synchronous: set/get/reset run under one lock, subscriber
callbacks fire inside the writer's call, and per-key sequence numbers
define the single total order every subscriber observes. Network servers
and in-process clients share this class.
"""

import threading
from collections import deque
from dataclasses import dataclass

from .schemas import CHANNEL_KEYS, RESET_KEY, STREAM_KEYS, validate_payload


@dataclass(frozen=True)
class ChannelUpdate:
    key: str
    seq: int
    payload: dict
    sender: str = ""

    def to_wire(self) -> dict:
        return {"event": "update", "key": self.key, "seq": self.seq,
                "payload": self.payload}


@dataclass(frozen=True)
class ResetEvent:
    scope: str = "all"

    def to_wire(self) -> dict:
        return {"event": "reset", "scope": self.scope}


class Subscription:
    def __init__(self, core: "BridgeCore", key: str, callback):
        self._core = core
        self.key = key
        self.callback = callback
        self.active = True

    def cancel(self) -> None:
        if self.active:
            self.active = False
            self._core._drop(self)


class BridgeCore:
    def __init__(self, retention: int = 1024):
        if retention < 1:
            raise ValueError("retention must be at least 1")
        self.retention = retention
        self._lock = threading.RLock()
        self._values: dict[str, tuple[int, dict]] = {}
        self._streams: dict[str, deque] = {k: deque(maxlen=retention)
                                           for k in STREAM_KEYS}
        self._seq: dict[str, int] = {k: 0 for k in CHANNEL_KEYS}
        self._subs: dict[str, list[Subscription]] = {k: [] for k in CHANNEL_KEYS}

    def set(self, key: str, payload: dict, sender: str = "") -> int:
        """Validate, store and broadcast one write; returns its seq.

        Writing the reset key doubles as a reset command: the write is
        delivered to that key's subscribers first, then the whole store is
        cleared with everyone notified.
        """
        with self._lock:
            validate_payload(key, payload)
            self._seq[key] += 1
            seq = self._seq[key]
            if key in STREAM_KEYS:
                self._streams[key].append((seq, payload))
            else:
                self._values[key] = (seq, payload)
            update = ChannelUpdate(key=key, seq=seq, payload=payload,
                                   sender=sender)
            self._notify(key, update)
            if key == RESET_KEY:
                self._reset_locked(payload.get("scope", "all"))
            return seq

    def get(self, key: str, count: int | None = None):
        """Latest value for a value-key (None when never written), or the
        most recent `count` retained events for a stream-key as
        [(seq, payload), ...] in seq order."""
        with self._lock:
            if key not in CHANNEL_KEYS:
                raise KeyError(key)
            if key in STREAM_KEYS:
                events = list(self._streams[key])
                if count is not None:
                    events = events[-count:] if count > 0 else []
                return events
            return self._values.get(key)

    def subscribe(self, key: str, callback) -> Subscription:
        """Deliver every later update on key, in seq order, to callback.
        The callback receives ChannelUpdate and ResetEvent objects."""
        with self._lock:
            if key not in CHANNEL_KEYS:
                raise KeyError(key)
            sub = Subscription(self, key, callback)
            self._subs[key].append(sub)
            return sub

    def reset(self, scope: str = "all") -> None:
        self.set(RESET_KEY, {"scope": scope})

    def _reset_locked(self, scope: str) -> None:
        event = ResetEvent(scope=scope)
        for key in CHANNEL_KEYS:
            for sub in list(self._subs[key]):
                if sub.active:
                    sub.callback(event)
        self._values.clear()
        for q in self._streams.values():
            q.clear()
        for key in self._seq:
            self._seq[key] = 0

    def _notify(self, key: str, update: ChannelUpdate) -> None:
        for sub in list(self._subs[key]):
            if sub.active:
                sub.callback(update)

    def _drop(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs[sub.key]:
                self._subs[sub.key].remove(sub)
