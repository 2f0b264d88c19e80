"""Robot command vocabulary, execution queue and operator feedback.

Movement commands queue up and run in order; flow-control commands act on
the queue immediately. Every externally visible status change is reported
through a Feedback whose message comes from a fixed catalog, so the
console can rely on exact strings.
"""

import math
import re
from dataclasses import dataclass
from enum import Enum

from .geometry import Pose2D


@dataclass(frozen=True)
class Forward:
    distance: float = 1.0

    def __post_init__(self):
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise ValueError("forward distance must be positive")


@dataclass(frozen=True)
class GoTo:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("go-to target must be finite")


@dataclass(frozen=True)
class Turn:
    direction: str  # "ccw" | "cw"
    degrees: float = 90.0

    def __post_init__(self):
        if self.direction not in ("ccw", "cw"):
            raise ValueError(f"bad turn direction {self.direction!r}")
        if not (0 < self.degrees <= 360):
            raise ValueError("turn degrees must be in (0, 360]")


@dataclass(frozen=True)
class Patrol:
    sides: int = 16
    radius: float = 1.5
    increment: float = 1.0

    def __post_init__(self):
        if self.sides < 3:
            raise ValueError("patrol needs at least 3 sides")
        if self.radius <= 0 or self.increment <= 0:
            raise ValueError("patrol radius and increment must be positive")


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class Continue:
    pass


@dataclass(frozen=True)
class Cancel:
    pass


@dataclass(frozen=True)
class CancelAll:
    pass


@dataclass(frozen=True)
class GoBack:
    pass


MOVEMENT_TYPES = (Forward, GoTo, Turn, Patrol)
FLOW_TYPES = (Stop, Continue, Cancel, CancelAll, GoBack)
Command = Forward | GoTo | Turn | Patrol | Stop | Continue | Cancel | CancelAll | GoBack


def is_movement(cmd) -> bool:
    return isinstance(cmd, MOVEMENT_TYPES)


# ---------------------------------------------------------------------------
# feedback

class FeedbackCode(str, Enum):
    LOOKING = "looking_for_path"
    REACHED = "reached_goal"
    UNABLE = "unable_to_complete"
    PAUSED = "paused"
    CANCELED = "canceled"
    CANCELED_ALL = "canceled_all"
    RESTARTING = "restarting"
    WAITING = "waiting"
    STRAYED = "strayed"
    NEED_INPUT = "need_user_input"
    NOT_UNDERSTOOD = "not_understood"


@dataclass(frozen=True)
class Feedback:
    code: str
    message: str
    x: float | None = None
    y: float | None = None
    ts: int = 0


# Exact display strings; (x, y) renders with one decimal place.
CATALOG_PATTERNS = (
    re.compile(r"^looking for path to \(-?\d+\.\d, -?\d+\.\d\)$"),
    re.compile(r"^successfully navigated to \(-?\d+\.\d, -?\d+\.\d\)$"),
    re.compile(r"^unable to complete goal$"),
    re.compile(r"^paused current goal$"),
    re.compile(r"^canceled goal$"),
    re.compile(r"^canceled all goals$"),
    re.compile(r"^restarting current goal$"),
    re.compile(r"^waiting for commands$"),
    re.compile(r"^moved from expected path and failed to reach goal$"),
    re.compile(r"^user input is required: keep going OR go back$"),
    re.compile(r"^I didn't understand$"),
)


def in_catalog(message: str) -> bool:
    return any(p.match(message) for p in CATALOG_PATTERNS)


def _xy(x: float, y: float) -> str:
    return f"({x:.1f}, {y:.1f})"


def fb_looking(x, y):
    return Feedback(FeedbackCode.LOOKING.value, f"looking for path to {_xy(x, y)}", x, y)


def fb_reached(x, y):
    return Feedback(FeedbackCode.REACHED.value,
                    f"successfully navigated to {_xy(x, y)}", x, y)


def fb_unable():
    return Feedback(FeedbackCode.UNABLE.value, "unable to complete goal")


def fb_paused():
    return Feedback(FeedbackCode.PAUSED.value, "paused current goal")


def fb_canceled():
    return Feedback(FeedbackCode.CANCELED.value, "canceled goal")


def fb_canceled_all():
    return Feedback(FeedbackCode.CANCELED_ALL.value, "canceled all goals")


def fb_restarting():
    return Feedback(FeedbackCode.RESTARTING.value, "restarting current goal")


def fb_waiting():
    return Feedback(FeedbackCode.WAITING.value, "waiting for commands")


def fb_strayed():
    return Feedback(FeedbackCode.STRAYED.value,
                    "moved from expected path and failed to reach goal")


def fb_need_input():
    return Feedback(FeedbackCode.NEED_INPUT.value,
                    "user input is required: keep going OR go back")


def fb_not_understood(reason: str = "parse_failure"):
    # the diagnostic rides in the code; the display string stays fixed
    return Feedback(f"{FeedbackCode.NOT_UNDERSTOOD.value}.{reason}",
                    "I didn't understand")


# ---------------------------------------------------------------------------
# resolved goals and the queue state machine

class Phase(Enum):
    EXECUTING = "executing"
    PAUSED = "paused"
    AWAITING_USER = "awaiting_user"


@dataclass(frozen=True)
class PointGoal:
    x: float
    y: float


@dataclass(frozen=True)
class TurnGoal:
    delta: float  # signed radians still to rotate at movement start


@dataclass(frozen=True)
class PatrolGoal:
    sides: int
    radius: float
    increment: float
    origin: Pose2D


Goal = PointGoal | TurnGoal | PatrolGoal


@dataclass
class ActiveMovement:
    command: Command
    goal: Goal
    start_pose: Pose2D
    phase: Phase = Phase.EXECUTING


class CommandQueue:
    """FIFO movement queue with flow control.

    Methods return the Feedback events the transition produced (timestamps
    unset; the controller stamps and publishes them). The queue never holds
    flow-control commands and at most one movement is active at a time.
    """

    def __init__(self):
        self.pending: list[Command] = []
        self.current: ActiveMovement | None = None
        self.history_start: Pose2D | None = None

    def is_idle(self) -> bool:
        return self.current is None and not self.pending

    def enqueue(self, cmd: Command, pose: Pose2D) -> list[Feedback]:
        if not is_movement(cmd):
            raise ValueError(f"not a movement command: {cmd!r}")
        self.pending.append(cmd)
        if self.current is None:
            return self._promote(pose)
        return []

    def apply_flow(self, cmd: Command, pose: Pose2D) -> list[Feedback]:
        if isinstance(cmd, Stop):
            if self.current is not None and self.current.phase == Phase.EXECUTING:
                self.current.phase = Phase.PAUSED
                return [fb_paused()]
            return []
        if isinstance(cmd, Continue):
            if self.current is not None and self.current.phase == Phase.PAUSED:
                self.current.phase = Phase.EXECUTING
                return [fb_restarting()]
            return []
        if isinstance(cmd, Cancel):
            if self.current is None:
                return []
            self.current = None
            return [fb_canceled()] + self._promote_or_wait(pose)
        if isinstance(cmd, CancelAll):
            self.pending.clear()
            self.current = None
            return [fb_canceled_all(), fb_waiting()]
        if isinstance(cmd, GoBack):
            back_to = (self.current.start_pose if self.current is not None
                       else self.history_start)
            if back_to is None:
                return []
            self.pending.clear()
            self.current = None
            return self.enqueue(GoTo(back_to.x, back_to.y), pose)
        raise ValueError(f"not a flow command: {cmd!r}")

    def on_reached(self, pose: Pose2D) -> list[Feedback]:
        """Current movement finished; report and move on."""
        assert self.current is not None
        goal = self.current.goal
        if isinstance(goal, PointGoal):
            done = fb_reached(goal.x, goal.y)
        else:
            done = fb_reached(pose.x, pose.y)
        self.current = None
        return [done] + self._promote_or_wait(pose)

    def on_unable(self, pose: Pose2D) -> list[Feedback]:
        """No path existed before motion began; drop the goal."""
        assert self.current is not None
        self.current = None
        return [fb_unable()] + self._promote_or_wait(pose)

    def on_stranded(self) -> list[Feedback]:
        """Motion began but replanning found no way; ask the operator."""
        assert self.current is not None
        self.current.phase = Phase.AWAITING_USER
        return [fb_strayed(), fb_need_input()]

    def resolve_user_choice(self, choice: str, pose: Pose2D) -> list[Feedback]:
        if (self.current is None or self.current.phase != Phase.AWAITING_USER
                or choice not in ("keep_going", "go_back")):
            return []
        failed = self.current
        self.current = None
        if choice == "keep_going":
            return self._promote_or_wait(pose)
        back = failed.start_pose
        return self.enqueue(GoTo(back.x, back.y), pose)

    def _promote_or_wait(self, pose: Pose2D) -> list[Feedback]:
        if self.pending:
            return self._promote(pose)
        return [fb_waiting()]

    def _promote(self, pose: Pose2D) -> list[Feedback]:
        cmd = self.pending.pop(0)
        goal = self._resolve_goal(cmd, pose)
        self.current = ActiveMovement(command=cmd, goal=goal, start_pose=pose)
        self.history_start = pose
        if isinstance(goal, PointGoal):
            return [fb_looking(goal.x, goal.y)]
        if isinstance(goal, PatrolGoal):
            first = (pose.x + goal.radius * math.cos(pose.theta),
                     pose.y + goal.radius * math.sin(pose.theta))
            return [fb_looking(first[0], first[1])]
        return []  # turns start silently; there is no path to search

    @staticmethod
    def _resolve_goal(cmd: Command, pose: Pose2D) -> Goal:
        if isinstance(cmd, Forward):
            return PointGoal(pose.x + cmd.distance * math.cos(pose.theta),
                             pose.y + cmd.distance * math.sin(pose.theta))
        if isinstance(cmd, GoTo):
            return PointGoal(cmd.x, cmd.y)
        if isinstance(cmd, Turn):
            delta = math.radians(cmd.degrees)
            if cmd.direction == "cw":
                delta = -delta
            return TurnGoal(delta)
        if isinstance(cmd, Patrol):
            return PatrolGoal(cmd.sides, cmd.radius, cmd.increment, origin=pose)
        raise ValueError(f"cannot resolve goal for {cmd!r}")
