"""The robot process: one deterministic control loop tying the simulator,
mapper, command queue, planner and language front end to the bridge.

Per tick the controller drains command-channel traffic, advances the
active movement, steps the simulator, and on the sensor cadence publishes
odometry, map changes and newly sighted fiducials. All timestamps are tick
indices, so identical inputs give identical channel traffic.
"""

import logging
from dataclasses import dataclass, replace

from .bridge.core import BridgeCore, ChannelUpdate, ResetEvent
from .bridge.schemas import (
    FEEDBACK_KEY,
    FIDUCIALS_KEY,
    KIRBY_KEY,
    MAP_KEY,
    ODOM_KEY,
)
from .commands import (
    Cancel,
    CancelAll,
    CommandQueue,
    Continue,
    Feedback,
    Forward,
    GoBack,
    GoTo,
    Patrol,
    PatrolGoal,
    Phase,
    PointGoal,
    Stop,
    Turn,
    TurnGoal,
    fb_not_understood,
    fb_unable,
    fb_waiting,
    in_catalog,
    is_movement,
)
from .config import RunConfig
from .geometry import Pose2D
from .language import (
    GroundingContext,
    GroundingError,
    ParseError,
    PointerEvent,
    ground,
    parse,
)
from .mapping import PerceivedMap, extract_segments, merge_into_map, tidy
from .navigation import (
    follow,
    nearest_free,
    path_blocked,
    plan,
    rasterize,
    ring_vertices,
)
from .world import Simulator, WorldSpec

log = logging.getLogger("deskbot.robot")

K_TURN = 4.0  # proportional gain for in-place rotation


class LocalLink:
    """Direct in-process attachment to a BridgeCore; used by the scenario
    runner and by tests. Fully synchronous and deterministic."""

    def __init__(self, core: BridgeCore, sender: str = "robot"):
        self.core = core
        self.sender = sender
        self._inbox: list[dict] = []
        self._reset = False
        core.subscribe(KIRBY_KEY, self._on_event)

    def _on_event(self, event) -> None:
        if isinstance(event, ChannelUpdate):
            if event.sender != self.sender:
                self._inbox.append(event.payload)
        elif isinstance(event, ResetEvent):
            self._reset = True

    def publish(self, key: str, payload: dict) -> None:
        self.core.set(key, payload, sender=self.sender)

    def inbox(self) -> list[dict]:
        out, self._inbox = self._inbox, []
        return out

    def reset_pending(self) -> bool:
        out, self._reset = self._reset, False
        return out


class TcpLink:
    """Bridge attachment over the TCP protocol, for the live robot."""

    def __init__(self, client):
        self.client = client
        client.subscribe(KIRBY_KEY)

    def publish(self, key: str, payload: dict) -> None:
        self.client.set(key, payload)

    def inbox(self) -> list[dict]:
        out = []
        for event in self.client.poll_updates():
            if event.get("event") == "update" and event.get("key") == KIRBY_KEY:
                out.append(event["payload"])
        return out

    def reset_pending(self) -> bool:
        return False  # resets arrive as events only on subscribed keys


@dataclass
class _TurnExec:
    remaining: float


@dataclass
class _PointExec:
    target: tuple[float, float]
    path: list[tuple[float, float]]
    index: int = 0
    began: bool = False
    map_version: int = -1
    stuck: int = 0      # consecutive blocked ticks
    backoff: int = 0    # reverse-escape ticks remaining


@dataclass
class _PatrolExec:
    ring: int = 0
    vertex: int = 0
    closing: bool = False
    reached_in_ring: int = 0
    leg: _PointExec | None = None


class RobotController:
    def __init__(self, world: WorldSpec, config: RunConfig, link):
        self.cfg = config
        self.world = world
        self.link = link
        self.sim = Simulator(
            world, dt=config.dt, v_max=config.v_max,
            omega_max=config.omega_max, robot_radius=config.robot_radius,
            lidar_beams=config.lidar_beams,
            lidar_max_range=config.lidar_max_range,
            lidar_sigma=config.lidar_sigma, cam_range=config.cam_range,
            cam_half_angle=config.cam_half_angle, seed=config.seed)
        self.queue = CommandQueue()
        self.map = PerceivedMap()
        self.fiducials: list = []       # cumulative FiducialObservation
        self.pointer: PointerEvent | None = None
        self.tick_index = 0
        self.published_feedback: list[Feedback] = []
        self._map_params = config.map_params()
        self._exec: tuple | None = None
        self._grid_obj = None
        self._grid_version = -1

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        """Initial sense-and-publish; the world map goes out before any
        command is accepted."""
        self._sense_and_publish()
        self._publish_events([fb_waiting()])

    def tick(self) -> None:
        self.tick_index += 1
        if self.link.reset_pending():
            self._republish_snapshot()
        for payload in self.link.inbox():
            self._dispatch(payload)
        self._advance_execution()
        self.sim.step()
        if self.tick_index % self.cfg.sensor_every == 0:
            self._sense_and_publish()

    def run_ticks(self, n: int) -> None:
        for _ in range(n):
            self.tick()

    def pose(self) -> Pose2D:
        return self.sim.state.pose

    # -- inbound traffic -----------------------------------------------------

    def _dispatch(self, payload: dict) -> None:
        cmd = payload.get("cmd")
        args = payload.get("args") or {}
        try:
            if cmd == "utterance":
                self._handle_utterance(args["text"])
            elif cmd == "pointer":
                self.pointer = PointerEvent(
                    x=args["x"], z=args["z"],
                    view=args.get("view", "omniscient"), ts=self.tick_index)
            elif cmd == "user_choice":
                self._publish_events(self.queue.resolve_user_choice(
                    args["choice"], self.pose()))
            else:
                self._apply_command(self._structured_command(cmd, args))
        except (KeyError, ValueError) as exc:
            # the bridge schema should have caught this; report, don't die
            log.warning("rejected command %r: %s", payload, exc)
            self._publish_events([fb_not_understood("bad_command")])

    @staticmethod
    def _structured_command(cmd: str, args: dict):
        if cmd == "forward":
            return Forward(args.get("x", 1.0))
        if cmd == "go_to":
            return GoTo(args["x"], args["y"])
        if cmd == "turn":
            return Turn(args["direction"], args.get("degrees", 90.0))
        if cmd == "patrol":
            return Patrol(args.get("sides", 16), args.get("radius", 1.5),
                          args.get("increment", 1.0))
        flows = {"stop": Stop, "continue": Continue, "cancel": Cancel,
                 "cancel_all": CancelAll, "go_back": GoBack}
        if cmd in flows:
            return flows[cmd]()
        raise ValueError(f"unknown command {cmd!r}")

    def _handle_utterance(self, text: str) -> None:
        try:
            abstract = parse(text)
        except ParseError as exc:
            log.info("parse failure %r: %s", text, exc)
            self._publish_events([fb_not_understood("parse_failure")])
            return
        try:
            command = ground(abstract, self._grounding_context())
        except GroundingError as exc:
            log.info("grounding failure %r: %s", text, exc.reason)
            self._publish_events([fb_not_understood(exc.reason)])
            return
        self._apply_command(command)

    def _apply_command(self, command) -> None:
        pose = self.pose()
        if is_movement(command):
            self._publish_events(self.queue.enqueue(command, pose))
        else:
            self._publish_events(self.queue.apply_flow(command, pose))

    def _grounding_context(self) -> GroundingContext:
        pointer = self.pointer
        if (pointer is not None
                and self.tick_index - pointer.ts > self.cfg.deixis_window_ticks):
            pointer = None
            self.pointer = None
        return GroundingContext(robot_pose=self.pose(),
                                fiducials=tuple(self.fiducials),
                                pointer=pointer)

    # -- movement execution ---------------------------------------------------

    def _advance_execution(self) -> None:
        active = self.queue.current
        if active is None or active.phase != Phase.EXECUTING:
            if active is None:
                self._exec = None
            self.sim.set_command(0.0, 0.0)
            return
        if self._exec is None or self._exec[0] is not active:
            state = self._make_exec(active)
            if self.queue.current is not active:
                # goal resolution already failed and moved the queue on
                self._exec = None
                self.sim.set_command(0.0, 0.0)
                return
            self._exec = (active, state)
        state = self._exec[1]
        goal = active.goal
        if isinstance(goal, TurnGoal):
            self._step_turn(state)
        elif isinstance(goal, PointGoal):
            self._step_point(state)
        else:
            self._step_patrol(active, state)

    def _make_exec(self, active):
        goal = active.goal
        if isinstance(goal, TurnGoal):
            return _TurnExec(remaining=goal.delta)
        if isinstance(goal, PointGoal):
            path = self._plan_to((goal.x, goal.y))
            if path is None:
                self._publish_events(self.queue.on_unable(self.pose()))
                return None
            return _PointExec(target=(goal.x, goal.y), path=path,
                              map_version=self.map.version)
        return _PatrolExec()

    def _step_turn(self, ex: _TurnExec) -> None:
        if abs(ex.remaining) <= self.cfg.turn_tol:
            self.sim.set_command(0.0, 0.0)
            self._publish_events(self.queue.on_reached(self.pose()))
            return
        omega = max(-self.cfg.omega_max,
                    min(self.cfg.omega_max, K_TURN * ex.remaining))
        self.sim.set_command(0.0, omega)
        ex.remaining -= omega * self.cfg.dt

    def _follow_leg(self, ex: _PointExec) -> str:
        """Advance one tick along a planned leg.

        Returns "reached", "no_path" (replanning failed) or "moving".
        Persistent wall contact triggers a short reverse escape before the
        next replan, so a robot wedged against an unmapped corner frees
        itself instead of pushing forever.
        """
        pose = self.pose()
        if ex.backoff > 0:
            ex.backoff -= 1
            self.sim.set_command(-0.5 * self.cfg.v_max, 0.0)
            return "moving"
        needs_replan = False
        if self.map.version != ex.map_version:
            ex.map_version = self.map.version
            needs_replan = path_blocked(self._grid(), ex.path, ex.index)
        if self.sim.state.collided and ex.began:
            ex.stuck += 1
            needs_replan = True
            if ex.stuck >= 3:
                ex.stuck = 0
                ex.backoff = 10
        else:
            ex.stuck = 0
        if needs_replan:
            fresh = self._plan_to(ex.target)
            if fresh is None:
                self.sim.set_command(0.0, 0.0)
                return "no_path"
            ex.path, ex.index = fresh, 0
        res = follow(ex.path, pose, ex.index, goal_tol=self.cfg.goal_tol,
                     lookahead=self.cfg.lookahead, v_max=self.cfg.v_max,
                     omega_max=self.cfg.omega_max)
        ex.index = res.index
        if res.reached:
            self.sim.set_command(0.0, 0.0)
            return "reached"
        self.sim.set_command(res.v, res.omega)
        if res.v != 0.0 or res.omega != 0.0:
            ex.began = True
        return "moving"

    def _step_point(self, ex: _PointExec) -> None:
        outcome = self._follow_leg(ex)
        if outcome == "reached":
            self._publish_events(self.queue.on_reached(self.pose()))
        elif outcome == "no_path":
            if ex.began:
                self._publish_events(self.queue.on_stranded())
            else:
                self._publish_events(self.queue.on_unable(self.pose()))

    def _step_patrol(self, active, ex: _PatrolExec) -> None:
        goal: PatrolGoal = active.goal
        pose = self.pose()
        # pick the next reachable vertex; skipped vertices get a note
        while ex.leg is None:
            if (self.cfg.patrol_max_rings
                    and ex.ring >= self.cfg.patrol_max_rings):
                self.sim.set_command(0.0, 0.0)
                self._publish_events(self.queue.on_reached(pose))
                return
            radius = goal.radius + ex.ring * goal.increment
            verts = ring_vertices(goal.sides, radius, goal.origin)
            target = verts[0] if ex.closing else verts[ex.vertex]
            path = self._plan_to(target)
            if path is None:
                self._publish_events([fb_unable()])
                if self._patrol_advance(ex, goal.sides, reached=False):
                    self.sim.set_command(0.0, 0.0)
                    self._publish_events(self.queue.on_reached(pose))
                    return
                continue
            ex.leg = _PointExec(target=target, path=path,
                                map_version=self.map.version)

        outcome = self._follow_leg(ex.leg)
        if outcome == "moving":
            return
        if outcome == "no_path":
            # a leg gone bad counts as an unreachable vertex, not a strand
            self._publish_events([fb_unable()])
        ex.leg = None
        if self._patrol_advance(ex, goal.sides, reached=outcome == "reached"):
            self._publish_events(self.queue.on_reached(pose))

    @staticmethod
    def _patrol_advance(ex: _PatrolExec, sides: int, reached: bool) -> bool:
        """Move the patrol bookkeeping forward; True means the patrol is
        finished (a whole ring had no reachable vertex)."""
        if ex.closing:
            ex.closing = False
            ex.ring += 1
            ex.vertex = 0
            ex.reached_in_ring = 0
            return False
        if reached:
            ex.reached_in_ring += 1
        ex.vertex += 1
        if ex.vertex >= sides:
            if ex.reached_in_ring == 0:
                return True
            ex.closing = True  # close the ring before stepping outward
        return False

    # -- planning helpers ------------------------------------------------------

    def _grid(self):
        if self._grid_version != self.map.version:
            # extra margin keeps lookahead corner-cutting off the walls
            self._grid_obj = rasterize(
                self.map, self.cfg.robot_radius + self.cfg.inflation_margin,
                self.world.bounds, self.cfg.grid_resolution)
            self._grid_version = self.map.version
        return self._grid_obj

    def _plan_to(self, target: tuple[float, float]):
        grid = self._grid()
        pose = self.pose()
        start = (pose.x, pose.y)
        if not grid.is_free(*grid.cell_of(*start)):
            start = nearest_free(grid, start, 2 * self.cfg.robot_radius)
            if start is None:
                return None
        goal = nearest_free(grid, target, self.cfg.goal_snap_radius)
        if goal is None:
            return None
        path = plan(grid, start, goal)
        if path is None:
            return None
        if grid.is_free(*grid.cell_of(*target)):
            path = path + [target]  # steer to the exact point, not the cell
        return path

    # -- outbound traffic ------------------------------------------------------

    def _sense_and_publish(self) -> None:
        pose = self.pose()
        scan = self.sim.lidar(self.tick_index)
        segments = extract_segments(scan, pose, self._map_params)
        merged = merge_into_map(self.map, segments, self._map_params)
        tidied = tidy(merged, self._map_params)
        if tidied.version != self.map.version:
            self.map = tidied
            self._publish_map()
        self.link.publish(ODOM_KEY, {
            "x": pose.x, "y": pose.y, "theta": pose.theta,
            "v": self.sim.state.v, "omega": self.sim.state.omega})
        new_obs = self.sim.fiducial_sweep()
        if new_obs:
            self.fiducials.extend(new_obs)
            self._publish_fiducials()

    def _publish_map(self) -> None:
        self.link.publish(MAP_KEY, {
            "segments": [{"a1": s.x1, "b1": s.y1, "a2": s.x2, "b2": s.y2}
                         for s in self.map.segments],
            "version": self.map.version})

    def _publish_fiducials(self) -> None:
        self.link.publish(FIDUCIALS_KEY, {
            "fiducials": [{"id": f.id, "x": f.pose.x, "y": f.pose.y,
                           "theta": f.pose.theta} for f in self.fiducials]})

    def _republish_snapshot(self) -> None:
        self._publish_map()
        self.link.publish(ODOM_KEY, {
            "x": self.pose().x, "y": self.pose().y, "theta": self.pose().theta,
            "v": self.sim.state.v, "omega": self.sim.state.omega})
        self._publish_fiducials()

    def _publish_events(self, events: list[Feedback]) -> None:
        for fb in events:
            if not in_catalog(fb.message):
                raise RuntimeError(f"feedback outside catalog: {fb.message!r}")
            stamped = replace(fb, ts=self.tick_index)
            self.published_feedback.append(stamped)
            payload = {"code": stamped.code, "message": stamped.message,
                       "ts": stamped.ts}
            if stamped.x is not None and stamped.y is not None:
                payload["x"] = stamped.x
                payload["y"] = stamped.y
            self.link.publish(FEEDBACK_KEY, payload)
