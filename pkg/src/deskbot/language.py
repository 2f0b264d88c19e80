"""Typed-English command parsing and reference grounding.

parse() maps an utterance onto either a concrete Command or an abstract
one that still contains a deictic or ordinal slot ("go there", "go to the
second one on the left"). ground() resolves those slots against a snapshot
of the robot's situation: its pose, the fiducials it has reported, and the
most recent on-screen pointer event.
"""

import math
import re
from dataclasses import dataclass

from .commands import (
    Cancel,
    CancelAll,
    Command,
    Continue,
    Forward,
    GoBack,
    GoTo,
    Patrol,
    Stop,
    Turn,
)
from .geometry import Pose2D, display_to_ros, normalize_angle
from .world import FiducialObservation

LITTLE_FURTHER = 0.25  # meters; "a little further" has no stated magnitude
FIDUCIAL_NEAR = 0.5    # max pointer-to-fiducial distance for "that one"
SIDE_AMBIGUOUS = 0.05  # |lateral offset| below this is neither left nor right


class ParseError(ValueError):
    """The utterance did not match the grammar."""


class GroundingError(ValueError):
    """A deictic or ordinal slot could not be resolved; .reason says why."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class OrdinalFiducial:
    rank: int           # 1-based
    side: str           # "left" | "right"


@dataclass(frozen=True)
class DeicticPoint:       # "go there"
    pass


@dataclass(frozen=True)
class DeicticFiducial:    # "go to that one"
    pass


@dataclass(frozen=True)
class DeicticTurn:        # "turn this way"
    pass


AbstractCommand = Command | OrdinalFiducial | DeicticPoint | DeicticFiducial | DeicticTurn


@dataclass(frozen=True)
class PointerEvent:
    x: float
    z: float
    view: str = "omniscient"
    ts: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.z)):
            raise ValueError("non-finite pointer coordinates")


@dataclass(frozen=True)
class GroundingContext:
    """Immutable snapshot used to resolve references. The caller is
    responsible for dropping pointer events older than the deixis window
    before building the context."""

    robot_pose: Pose2D
    fiducials: tuple[FiducialObservation, ...] = ()
    pointer: PointerEvent | None = None


_UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11,
    "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
}
_TENS = {"twenty": 20, "thirty": 30, "forty": 40, "fifty": 50, "sixty": 60,
         "seventy": 70, "eighty": 80, "ninety": 90}
_ORDINALS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}

_UNITS_ALT = "|".join(_UNITS)
_TENS_ALT = "|".join(_TENS)
_NUMWORD = rf"(?:(?:{_TENS_ALT})(?:[ -](?:{_UNITS_ALT}))?|(?:{_UNITS_ALT}))"
_NUM = rf"(?:[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?|{_NUMWORD})"
_ORD = r"(?:\d+(?:st|nd|rd|th)|[a-z]+)"


def _to_number(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        pass
    words = token.replace("-", " ").split()
    if len(words) == 1 and words[0] in _UNITS:
        return float(_UNITS[words[0]])
    if len(words) == 1 and words[0] in _TENS:
        return float(_TENS[words[0]])
    if (len(words) == 2 and words[0] in _TENS and words[1] in _UNITS
            and _UNITS[words[1]] < 10):
        return float(_TENS[words[0]] + _UNITS[words[1]])
    raise ParseError(f"not a number: {token!r}")


def _to_ordinal(token: str) -> int:
    if token in _ORDINALS:
        return _ORDINALS[token]
    m = re.fullmatch(r"(\d+)(?:st|nd|rd|th)", token)
    if m:
        return int(m.group(1))
    raise ParseError(f"not an ordinal: {token!r}")


_RULES: list[tuple[re.Pattern, object]] = []


def _rule(pattern: str):
    def deco(fn):
        _RULES.append((re.compile(pattern), fn))
        return fn
    return deco


@_rule(r"^go forward(?: (?P<n>%s)(?: meters?| m)?)?$" % _NUM)
def _r_forward(m):
    return Forward(_to_number(m["n"])) if m["n"] else Forward()


@_rule(r"^a little further$")
def _r_little(m):
    return Forward(LITTLE_FURTHER)


@_rule(r"^go to (?:the )?(?P<ord>%s) (?:one|fiducial)(?: on)?(?: the)? "
       r"(?P<side>left|right)$" % _ORD)
def _r_ordinal(m):
    return OrdinalFiducial(_to_ordinal(m["ord"]), m["side"])


@_rule(r"^go to that one$")
def _r_that_one(m):
    return DeicticFiducial()


@_rule(r"^go there$")
def _r_there(m):
    return DeicticPoint()


@_rule(r"^turn this way$")
def _r_this_way(m):
    return DeicticTurn()


@_rule(r"^go to (?P<x>%s),? (?P<y>%s)$" % (_NUM, _NUM))
def _r_goto(m):
    return GoTo(_to_number(m["x"]), _to_number(m["y"]))


@_rule(r"^turn (?P<dir>left|right)(?: (?P<n>%s)(?: degrees?)?)?$" % _NUM)
def _r_turn(m):
    degrees = _to_number(m["n"]) if m["n"] else 90.0
    return Turn("ccw" if m["dir"] == "left" else "cw", degrees)


@_rule(r"^patrol(?: (?P<s>%s) (?P<r>%s) (?P<i>%s))?$" % (_NUM, _NUM, _NUM))
def _r_patrol(m):
    if not m["s"]:
        return Patrol()
    sides = _to_number(m["s"])
    if sides != int(sides):
        raise ParseError("patrol sides must be a whole number")
    return Patrol(int(sides), _to_number(m["r"]), _to_number(m["i"]))


@_rule(r"^stop$")
def _r_stop(m):
    return Stop()


@_rule(r"^continue$")
def _r_continue(m):
    return Continue()


@_rule(r"^cancel$")
def _r_cancel(m):
    return Cancel()


@_rule(r"^cancel all$")
def _r_cancel_all(m):
    return CancelAll()


@_rule(r"^go back$")
def _r_go_back(m):
    return GoBack()


def parse(text: str) -> AbstractCommand:
    """Parse one utterance; raises ParseError for anything off-grammar."""
    # strip punctuation, but keep decimal points inside numbers
    cleaned = re.sub(r"[,!?()]|\.(?!\d)", " ", text.lower())
    cleaned = re.sub(r"\s+", " ", cleaned).strip()
    if not cleaned:
        raise ParseError("empty utterance")
    for pattern, fn in _RULES:
        m = pattern.match(cleaned)
        if m is None:
            continue
        try:
            return fn(m)
        except ParseError:
            continue  # e.g. a word the number grammar rejects; try other rules
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    raise ParseError(f"no grammar rule matches {cleaned!r}")


def _robot_frame(pose: Pose2D, x: float, y: float) -> tuple[float, float]:
    dx, dy = x - pose.x, y - pose.y
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    return (c * dx + s * dy, -s * dx + c * dy)


def ground(abstract: AbstractCommand, ctx: GroundingContext,
           fiducial_near: float = FIDUCIAL_NEAR,
           side_ambiguous: float = SIDE_AMBIGUOUS) -> Command:
    """Resolve deictic and ordinal slots into a concrete Command.

    Raises GroundingError with a machine-readable reason when the context
    cannot support the reference (no recent pointer, ordinal past the last
    matching fiducial, pointer not near any fiducial).
    """
    if isinstance(abstract, OrdinalFiducial):
        candidates = []
        for f in ctx.fiducials:
            fx, fy = _robot_frame(ctx.robot_pose, f.pose.x, f.pose.y)
            if fx <= 0 or abs(fy) < side_ambiguous:
                continue
            if (fy > 0) != (abstract.side == "left"):
                continue
            candidates.append((fx, f.id, f))
        candidates.sort(key=lambda c: (c[0], c[1]))
        if abstract.rank > len(candidates):
            raise GroundingError("ordinal_out_of_range")
        chosen = candidates[abstract.rank - 1][2]
        return GoTo(chosen.pose.x, chosen.pose.y)

    if isinstance(abstract, (DeicticPoint, DeicticFiducial, DeicticTurn)):
        if ctx.pointer is None:
            raise GroundingError("no_recent_pointer")
        a, b = display_to_ros(ctx.pointer.x, ctx.pointer.z)
        if isinstance(abstract, DeicticPoint):
            return GoTo(a, b)
        if isinstance(abstract, DeicticFiducial):
            best = None
            best_key = None
            for f in ctx.fiducials:
                d = math.hypot(f.pose.x - a, f.pose.y - b)
                key = (d, f.id)
                if d <= fiducial_near and (best_key is None or key < best_key):
                    best_key = key
                    best = f
            if best is None:
                raise GroundingError("no_fiducial_near_pointer")
            return GoTo(best.pose.x, best.pose.y)
        bearing = math.atan2(b - ctx.robot_pose.y, a - ctx.robot_pose.x)
        delta = normalize_angle(bearing - ctx.robot_pose.theta)
        direction = "ccw" if delta >= 0 else "cw"
        degrees = max(math.degrees(abs(delta)), 1e-9)
        return Turn(direction, degrees)

    return abstract  # already concrete


def render(cmd: Command) -> str:
    """Canonical surface string; parse(render(c)) == c."""
    if isinstance(cmd, Forward):
        return f"go forward {cmd.distance!r}"
    if isinstance(cmd, GoTo):
        return f"go to {cmd.x!r} {cmd.y!r}"
    if isinstance(cmd, Turn):
        side = "left" if cmd.direction == "ccw" else "right"
        return f"turn {side} {cmd.degrees!r}"
    if isinstance(cmd, Patrol):
        return f"patrol {cmd.sides} {cmd.radius!r} {cmd.increment!r}"
    if isinstance(cmd, Stop):
        return "stop"
    if isinstance(cmd, Continue):
        return "continue"
    if isinstance(cmd, Cancel):
        return "cancel"
    if isinstance(cmd, CancelAll):
        return "cancel all"
    if isinstance(cmd, GoBack):
        return "go back"
    raise ValueError(f"cannot render {cmd!r}")
