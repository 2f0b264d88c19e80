"""Channel keys and payload validation for the services bridge.

Every write is validated against its key's schema before it is stored or
broadcast, so no client can ever observe a malformed payload.
"""

from jsonschema import Draft202012Validator

MAP_KEY = "Map"
ODOM_KEY = "Odom"
KIRBY_KEY = "Kirby"
FIDUCIALS_KEY = "Fiducials"
FEEDBACK_KEY = "Kirby_Feedback"
RESET_KEY = "Bridge_Reset"

CHANNEL_KEYS = (MAP_KEY, ODOM_KEY, KIRBY_KEY, FIDUCIALS_KEY, FEEDBACK_KEY,
                RESET_KEY)
VALUE_KEYS = frozenset({MAP_KEY, ODOM_KEY, FIDUCIALS_KEY})
STREAM_KEYS = frozenset({KIRBY_KEY, FEEDBACK_KEY, RESET_KEY})

_NUMBER = {"type": "number"}

_SCHEMAS = {
    MAP_KEY: {
        "type": "object",
        "properties": {
            "segments": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"a1": _NUMBER, "b1": _NUMBER,
                                   "a2": _NUMBER, "b2": _NUMBER},
                    "required": ["a1", "b1", "a2", "b2"],
                    "additionalProperties": False,
                },
            },
            "version": {"type": "integer", "minimum": 0},
        },
        "required": ["segments", "version"],
        "additionalProperties": False,
    },
    ODOM_KEY: {
        "type": "object",
        "properties": {"x": _NUMBER, "y": _NUMBER, "theta": _NUMBER,
                       "v": _NUMBER, "omega": _NUMBER},
        "required": ["x", "y", "theta", "v", "omega"],
        "additionalProperties": False,
    },
    FIDUCIALS_KEY: {
        "type": "object",
        "properties": {
            "fiducials": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"id": {"type": "integer", "minimum": 0},
                                   "x": _NUMBER, "y": _NUMBER,
                                   "theta": _NUMBER},
                    "required": ["id", "x", "y", "theta"],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["fiducials"],
        "additionalProperties": False,
    },
    FEEDBACK_KEY: {
        "type": "object",
        "properties": {"code": {"type": "string"},
                       "message": {"type": "string"},
                       "x": _NUMBER, "y": _NUMBER,
                       "ts": {"type": "integer", "minimum": 0}},
        "required": ["code", "message", "ts"],
        "additionalProperties": False,
    },
    RESET_KEY: {
        "type": "object",
        "properties": {"scope": {"const": "all"}},
        "required": ["scope"],
        "additionalProperties": False,
    },
}

# The command channel nests per-command argument schemas under "cmd".
_ARG_SCHEMAS = {
    "forward": {"properties": {"x": {"type": "number", "exclusiveMinimum": 0}}},
    "go_to": {"properties": {"x": _NUMBER, "y": _NUMBER},
              "required": ["x", "y"]},
    "turn": {"properties": {"direction": {"enum": ["ccw", "cw"]},
                            "degrees": {"type": "number",
                                        "exclusiveMinimum": 0,
                                        "maximum": 360}},
             "required": ["direction"]},
    "patrol": {"properties": {"sides": {"type": "integer", "minimum": 3},
                              "radius": {"type": "number",
                                         "exclusiveMinimum": 0},
                              "increment": {"type": "number",
                                            "exclusiveMinimum": 0}}},
    "stop": {}, "continue": {}, "cancel": {}, "cancel_all": {}, "go_back": {},
    "utterance": {"properties": {"text": {"type": "string", "minLength": 1}},
                  "required": ["text"]},
    "pointer": {"properties": {"x": _NUMBER, "z": _NUMBER,
                               "view": {"enum": ["omniscient", "perspective"]}},
                "required": ["x", "z"]},
    "user_choice": {"properties": {"choice": {"enum": ["keep_going",
                                                       "go_back"]}},
                    "required": ["choice"]},
}

for name, sch in _ARG_SCHEMAS.items():
    sch.setdefault("type", "object")
    sch.setdefault("additionalProperties", False)

_KIRBY_ENVELOPE = {
    "type": "object",
    "properties": {"cmd": {"enum": sorted(_ARG_SCHEMAS)},
                   "args": {"type": "object"}},
    "required": ["cmd"],
    "additionalProperties": False,
}

_VALIDATORS = {key: Draft202012Validator(schema)
               for key, schema in _SCHEMAS.items()}
_KIRBY_VALIDATOR = Draft202012Validator(_KIRBY_ENVELOPE)
_ARG_VALIDATORS = {name: Draft202012Validator(sch)
                   for name, sch in _ARG_SCHEMAS.items()}


class SchemaViolation(ValueError):
    pass


def validate_payload(key: str, payload) -> None:
    """Raise SchemaViolation unless payload conforms to the key's schema."""
    if key not in CHANNEL_KEYS:
        raise SchemaViolation(f"unknown channel key {key!r}")
    if key == KIRBY_KEY:
        _check(_KIRBY_VALIDATOR, payload, key)
        cmd = payload["cmd"]
        _check(_ARG_VALIDATORS[cmd], payload.get("args", {}), f"{key}.{cmd}")
        return
    _check(_VALIDATORS[key], payload, key)


def _check(validator, payload, label):
    errors = sorted(validator.iter_errors(payload), key=str)
    if errors:
        first = errors[0]
        path = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise SchemaViolation(f"{label}: {first.message} (at {path})")
