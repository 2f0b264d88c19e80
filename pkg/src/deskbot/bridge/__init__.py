from .client import BridgeClient, BridgeError
from .core import BridgeCore, ChannelUpdate, ResetEvent, Subscription
from .schemas import (
    CHANNEL_KEYS,
    FEEDBACK_KEY,
    FIDUCIALS_KEY,
    KIRBY_KEY,
    MAP_KEY,
    ODOM_KEY,
    RESET_KEY,
    STREAM_KEYS,
    VALUE_KEYS,
    SchemaViolation,
    validate_payload,
)
from .server import BridgeServer, run_bridge

__all__ = [
    "BridgeClient", "BridgeCore", "BridgeError", "BridgeServer",
    "ChannelUpdate", "ResetEvent", "Subscription", "run_bridge",
    "CHANNEL_KEYS", "VALUE_KEYS", "STREAM_KEYS", "SchemaViolation",
    "validate_payload", "MAP_KEY", "ODOM_KEY", "KIRBY_KEY", "FIDUCIALS_KEY",
    "FEEDBACK_KEY", "RESET_KEY",
]
