"""Headless scripted runs: the whole bridge + robot stack in one process.

A script is a plain-text list of timed lines:

    @40  utter "patrol 8 1.5 1"
    @900 point 0.9 3.1
    @910 utter "go there"
    @920 expect "successfully navigated to (3.1, -0.9)"
    @930 choose keep_going

utter/point/choose inject writes onto the command channel when the run
reaches their tick. expect lines assert that the quoted feedback message
appears, in script order, each match consuming the stream up to that
point; a step that makes no progress for timeout_ticks fails the run.

Everything executes in-process against one BridgeCore on simulated time,
so a given world + config + script yields a byte-identical transcript.
"""

import json
import shlex
from dataclasses import dataclass, field

from .bridge.core import BridgeCore, ChannelUpdate, ResetEvent
from .bridge.schemas import CHANNEL_KEYS, FEEDBACK_KEY, KIRBY_KEY
from .config import RunConfig
from .controller import LocalLink, RobotController
from .world import WorldSpec


class ScriptError(ValueError):
    """Script rejected; str() carries the line number and reason."""


@dataclass(frozen=True)
class ScriptStep:
    tick: int
    lineno: int
    kind: str                 # utter | point | choose | expect
    text: str = ""
    x: float = 0.0
    z: float = 0.0
    view: str = "omniscient"
    choice: str = ""


def parse_script(text: str, source: str = "<script>") -> list[ScriptStep]:
    steps: list[ScriptStep] = []

    def fail(lineno, msg):
        raise ScriptError(f"{source}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            parts = shlex.split(line, comments=True)
        except ValueError as exc:
            fail(lineno, f"bad quoting: {exc}")
        if not parts[0].startswith("@"):
            fail(lineno, "line must start with @tick")
        try:
            tick = int(parts[0][1:])
        except ValueError:
            fail(lineno, f"bad tick {parts[0]!r}")
        if tick < 0:
            fail(lineno, "tick must be non-negative")
        if len(parts) < 2:
            fail(lineno, "missing directive")
        kind, args = parts[1], parts[2:]
        if kind == "utter":
            if len(args) != 1:
                fail(lineno, "utter needs one quoted string")
            steps.append(ScriptStep(tick, lineno, "utter", text=args[0]))
        elif kind == "expect":
            if len(args) != 1:
                fail(lineno, "expect needs one quoted string")
            steps.append(ScriptStep(tick, lineno, "expect", text=args[0]))
        elif kind == "point":
            if len(args) not in (2, 3):
                fail(lineno, "point needs X Z [view]")
            view = args[2] if len(args) == 3 else "omniscient"
            if view not in ("omniscient", "perspective"):
                fail(lineno, f"bad view {view!r}")
            try:
                x, z = float(args[0]), float(args[1])
            except ValueError:
                fail(lineno, "point coordinates must be numbers")
            steps.append(ScriptStep(tick, lineno, "point", x=x, z=z, view=view))
        elif kind == "choose":
            if len(args) != 1 or args[0] not in ("keep_going", "go_back"):
                fail(lineno, "choose needs keep_going or go_back")
            steps.append(ScriptStep(tick, lineno, "choose", choice=args[0]))
        else:
            fail(lineno, f"unknown directive {kind!r}")
    return steps


def load_script(path: str) -> list[ScriptStep]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_script(fh.read(), source=path)


@dataclass
class ScenarioResult:
    ok: bool
    failures: list[str] = field(default_factory=list)
    transcript: list[str] = field(default_factory=list)
    feedback: list[dict] = field(default_factory=list)
    final_tick: int = 0

    def transcript_text(self) -> str:
        return "\n".join(self.transcript) + "\n"


def run_scenario(world: WorldSpec, config: RunConfig,
                 steps: list[ScriptStep], timeout_ticks: int = 6000,
                 operator: str = "operator") -> ScenarioResult:
    """Drive one scripted run to completion.

    The run ends successfully when every injection fired, every expect
    matched in order, and the robot is idle again. It fails when a step
    stalls past timeout_ticks.
    """
    core = BridgeCore(retention=config.retention)
    result = ScenarioResult(ok=False)
    controller_box: list[RobotController] = []

    def now() -> int:
        return controller_box[0].tick_index if controller_box else 0

    def recorder(key):
        def on_event(event):
            if isinstance(event, ChannelUpdate):
                payload = json.dumps(event.payload, sort_keys=True,
                                     separators=(",", ":"))
                result.transcript.append(
                    f"@{now()} {key} seq={event.seq} {payload}")
                if key == FEEDBACK_KEY:
                    result.feedback.append(event.payload)
            elif isinstance(event, ResetEvent):
                result.transcript.append(f"@{now()} {key} reset")
        return on_event

    for key in CHANNEL_KEYS:
        core.subscribe(key, recorder(key))

    link = LocalLink(core)
    controller = RobotController(world, config, link)
    controller_box.append(controller)
    controller.start()

    injections = [s for s in steps if s.kind != "expect"]
    injections.sort(key=lambda s: (s.tick, s.lineno))
    expects = [s for s in steps if s.kind == "expect"]

    inject_i = 0
    expect_i = 0
    consumed = 0          # feedback entries already claimed by expects
    last_progress = 0
    last_injection_tick = injections[-1].tick if injections else 0

    def inject(step: ScriptStep) -> None:
        if step.kind == "utter":
            payload = {"cmd": "utterance", "args": {"text": step.text}}
        elif step.kind == "point":
            payload = {"cmd": "pointer",
                       "args": {"x": step.x, "z": step.z, "view": step.view}}
        else:
            payload = {"cmd": "user_choice", "args": {"choice": step.choice}}
        core.set(KIRBY_KEY, payload, sender=operator)

    while True:
        t = controller.tick_index
        while inject_i < len(injections) and injections[inject_i].tick <= t:
            inject(injections[inject_i])
            inject_i += 1
            last_progress = t
        while expect_i < len(expects):
            want = expects[expect_i].text
            hit = next((i for i in range(consumed, len(result.feedback))
                        if result.feedback[i]["message"] == want), None)
            if hit is None:
                break
            consumed = hit + 1
            expect_i += 1
            last_progress = t
        if (inject_i == len(injections) and expect_i == len(expects)
                and t >= last_injection_tick and controller.queue.is_idle()):
            result.ok = True
            break
        if t - last_progress > timeout_ticks:
            if expect_i < len(expects):
                step = expects[expect_i]
                result.failures.append(
                    f"line {step.lineno}: feedback {step.text!r} not seen "
                    f"within {timeout_ticks} ticks")
            else:
                result.failures.append(
                    f"robot not idle within {timeout_ticks} ticks of the "
                    f"last script event")
            break
        controller.tick()

    result.final_tick = controller.tick_index
    return result
