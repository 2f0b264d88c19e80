import math

from deskbot.bridge import FEEDBACK_KEY, KIRBY_KEY, MAP_KEY, ODOM_KEY
from deskbot.bridge.core import BridgeCore, ChannelUpdate
from deskbot.commands import Phase
from deskbot.config import RunConfig
from deskbot.controller import LocalLink, RobotController
from deskbot.geometry import Pose2D, Segment2D
from deskbot.world import Fiducial, WorldSpec, square_room

EMPTY_WORLD = WorldSpec(bounds=(-6, -6, 6, 6), walls=(), fiducials=(),
                        robot_start=Pose2D(0, 0, 0))


def corridor_world(block_x=None):
    """A 1 m wide corridor along +x; optionally a wall sealing it at x."""
    walls = [
        Segment2D(-1, -0.5, 8, -0.5),
        Segment2D(-1, 0.5, 8, 0.5),
        Segment2D(-1, -0.5, -1, 0.5),
        Segment2D(8, -0.5, 8, 0.5),
    ]
    if block_x is not None:
        walls.append(Segment2D(block_x, -0.5, block_x, 0.5))
    return WorldSpec(bounds=(-1.5, -1, 8.5, 1), walls=tuple(walls),
                     fiducials=(), robot_start=Pose2D(0, 0, 0))


class Rig:
    def __init__(self, world, **overrides):
        overrides.setdefault("lidar_beams", 90)  # fast but plenty for tests
        self.core = BridgeCore()
        self.feedback = []
        self.updates = {MAP_KEY: [], ODOM_KEY: [], "Fiducials": []}
        self.core.subscribe(FEEDBACK_KEY, self._on_feedback)
        for key in self.updates:
            self.core.subscribe(key, self._make_recorder(key))
        link = LocalLink(self.core)
        self.ctrl = RobotController(world, RunConfig(**overrides), link)
        self.ctrl.start()

    def _on_feedback(self, event):
        if isinstance(event, ChannelUpdate):
            self.feedback.append(event.payload)

    def _make_recorder(self, key):
        def record(event):
            if isinstance(event, ChannelUpdate):
                self.updates[key].append(event.payload)
        return record

    def messages(self):
        return [f["message"] for f in self.feedback]

    def send(self, cmd, **args):
        self.core.set(KIRBY_KEY, {"cmd": cmd, "args": args}, sender="operator")

    def utter(self, text):
        self.send("utterance", text=text)

    def run(self, ticks):
        self.ctrl.run_ticks(ticks)

    def run_until_idle(self, max_ticks=20000):
        for _ in range(max_ticks):
            self.ctrl.tick()
            if self.ctrl.queue.is_idle():
                return
        raise AssertionError(f"not idle after {max_ticks} ticks; "
                             f"messages={self.messages()}")

    def pose(self):
        return self.ctrl.pose()


class TestStartup:
    def test_map_published_before_first_command(self):
        rig = Rig(square_room(4.0))
        assert rig.updates[MAP_KEY], "no initial map publication"
        assert len(rig.updates[MAP_KEY][0]["segments"]) >= 1
        assert rig.messages() == ["waiting for commands"]

    def test_odom_published_on_cadence(self):
        rig = Rig(EMPTY_WORLD)
        rig.run(25)
        assert len(rig.updates[ODOM_KEY]) == 1 + 5  # startup + every 5 ticks


class TestMovementDefaults:
    def test_go_forward_one_meter(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go forward")
        rig.run_until_idle()
        pose = rig.pose()
        assert math.hypot(pose.x - 1.0, pose.y) <= 0.05
        assert "successfully navigated to (1.0, 0.0)" in rig.messages()

    def test_turn_left_ninety(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("turn left")
        rig.run_until_idle()
        assert abs(math.degrees(rig.pose().theta) - 90.0) <= 2.0

    def test_turn_right_ninety(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("turn right")
        rig.run_until_idle()
        assert abs(math.degrees(rig.pose().theta) + 90.0) <= 2.0

    def test_full_circle_turn_actually_rotates(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("turn left 360")
        headings = []
        for _ in range(400):
            rig.ctrl.tick()
            headings.append(rig.pose().theta)
            if rig.ctrl.queue.is_idle():
                break
        assert rig.ctrl.queue.is_idle()
        assert any(abs(h) > 2.5 for h in headings)  # crossed the far side

    def test_go_to(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go to 1.5 -1")
        rig.run_until_idle()
        pose = rig.pose()
        assert math.hypot(pose.x - 1.5, pose.y + 1) <= 0.1
        assert "looking for path to (1.5, -1.0)" in rig.messages()


class TestFlowControl:
    def test_pause_produces_zero_displacement(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go forward 3")
        rig.run(60)
        rig.utter("stop")
        rig.run(2)  # deliver + settle
        frozen = rig.pose()
        rig.run(200)
        after = rig.pose()
        assert math.hypot(after.x - frozen.x, after.y - frozen.y) < 1e-9
        assert "paused current goal" in rig.messages()

    def test_continue_resumes_to_same_goal(self):
        uninterrupted = Rig(EMPTY_WORLD)
        uninterrupted.utter("go forward 2")
        uninterrupted.run_until_idle()
        final_a = uninterrupted.pose()

        paused = Rig(EMPTY_WORLD)
        paused.utter("go forward 2")
        paused.run(50)
        paused.utter("stop")
        paused.run(40)
        paused.utter("continue")
        paused.run_until_idle()
        final_b = paused.pose()
        assert "restarting current goal" in paused.messages()
        assert math.hypot(final_a.x - final_b.x, final_a.y - final_b.y) <= 0.05

    def test_cancel_all_reports_waiting(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go forward 3")
        rig.utter("turn left")
        rig.run(30)
        rig.utter("cancel all")
        rig.run(2)
        assert rig.messages()[-2:] == ["canceled all goals",
                                       "waiting for commands"]
        assert rig.ctrl.queue.is_idle()

    def test_cancel_promotes_queued_goal(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go to 3 0")
        rig.utter("go to 0 3")
        rig.run(30)
        rig.utter("cancel")
        rig.run(2)
        msgs = rig.messages()
        assert "canceled goal" in msgs
        assert "looking for path to (0.0, 3.0)" in msgs

    def test_go_back_returns_to_movement_start(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go forward 3")
        rig.run(160)
        moved = rig.pose()
        assert math.hypot(moved.x, moved.y) > 0.5  # it really left
        rig.utter("go back")
        rig.run_until_idle()
        pose = rig.pose()
        assert math.hypot(pose.x, pose.y) <= 0.05

    def test_fifo_looking_order(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("go to 1 0")
        rig.utter("go to 1 1")
        rig.utter("go to 0 1")
        rig.run_until_idle()
        looking = [m for m in rig.messages() if m.startswith("looking")]
        assert looking == ["looking for path to (1.0, 0.0)",
                           "looking for path to (1.0, 1.0)",
                           "looking for path to (0.0, 1.0)"]


class TestUnableAndStranded:
    def test_unreachable_from_start_is_unable(self):
        # target far outside the corridor's bounds-limited grid
        rig = Rig(corridor_world(block_x=1.0), lidar_max_range=3.5)
        rig.run(10)  # let the block be mapped before the command
        rig.utter("go to 6 0")
        rig.run(10)
        msgs = rig.messages()
        assert "unable to complete goal" in msgs
        assert "moved from expected path and failed to reach goal" not in msgs

    def stranded_rig(self):
        rig = Rig(corridor_world(block_x=4.0), lidar_max_range=2.0)
        rig.utter("go to 6 0")
        for _ in range(3000):
            rig.ctrl.tick()
            if "user input is required: keep going OR go back" in rig.messages():
                return rig
        raise AssertionError(f"never stranded: {rig.messages()}")

    def test_discovered_wall_triggers_user_input_flow(self):
        rig = self.stranded_rig()
        msgs = rig.messages()
        i = msgs.index("moved from expected path and failed to reach goal")
        assert msgs[i + 1] == "user input is required: keep going OR go back"
        assert rig.ctrl.queue.current.phase == Phase.AWAITING_USER

    def test_go_back_choice(self):
        rig = self.stranded_rig()
        rig.send("user_choice", choice="go_back")
        rig.run_until_idle(30000)
        pose = rig.pose()
        assert math.hypot(pose.x, pose.y) <= 0.05

    def test_keep_going_choice_runs_next_command(self):
        rig = self.stranded_rig()
        rig.utter("turn left")   # queued behind the stuck goal
        rig.run(5)
        heading_before = rig.pose().theta
        rig.send("user_choice", choice="keep_going")
        rig.run_until_idle(5000)
        assert abs(math.degrees(rig.pose().theta - heading_before) - 90) <= 2.5

    def test_choice_without_question_ignored(self):
        rig = Rig(EMPTY_WORLD)
        rig.send("user_choice", choice="keep_going")
        rig.run(5)
        assert rig.messages() == ["waiting for commands"]


class TestLanguageIntegration:
    def test_parse_failure_feedback(self):
        rig = Rig(EMPTY_WORLD)
        rig.utter("flibber")
        rig.run(2)
        assert rig.messages()[-1] == "I didn't understand"
        assert rig.ctrl.queue.is_idle()

    def test_pointer_plus_go_there(self):
        rig = Rig(EMPTY_WORLD)
        rig.send("pointer", x=0.0, z=1.0, view="omniscient")  # ros (1, 0)
        rig.utter("go there")
        rig.run_until_idle()
        pose = rig.pose()
        assert math.hypot(pose.x - 1.0, pose.y) <= 0.1

    def test_stale_pointer_rejected(self):
        rig = Rig(EMPTY_WORLD, deixis_window_s=0.5)
        rig.send("pointer", x=0.0, z=1.0)
        rig.run(30)  # 1.5 s at dt=0.05, past the window
        rig.utter("go there")
        rig.run(2)
        assert rig.messages()[-1] == "I didn't understand"
        codes = [f["code"] for f in rig.feedback]
        assert codes[-1].endswith("no_recent_pointer")

    def test_turn_this_way(self):
        rig = Rig(EMPTY_WORLD)
        rig.send("pointer", x=-5.0, z=0.0)   # ros (0, 5): due +y
        rig.utter("turn this way")
        rig.run_until_idle()
        assert abs(math.degrees(rig.pose().theta) - 90) <= 2.0

    def test_ordinal_with_live_fiducials(self):
        world = WorldSpec(bounds=(-6, -6, 6, 6), walls=(),
                          fiducials=(Fiducial(7, Pose2D(1, -1, 0)),
                                     Fiducial(8, Pose2D(2, -1, 0)),
                                     Fiducial(9, Pose2D(1.5, 1, 0))),
                          robot_start=Pose2D(0, 0, 0))
        rig = Rig(world, cam_range=4.0, cam_half_angle_deg=89.0)
        rig.run(10)  # camera sweep publishes the markers
        assert rig.updates["Fiducials"]
        rig.utter("go to the first one on the right")
        rig.run_until_idle()
        pose = rig.pose()
        assert math.hypot(pose.x - 1.0, pose.y + 1.0) <= 0.1


class TestPatrolExecution:
    def test_small_patrol_completes_and_waits(self):
        rig = Rig(square_room(4.0))
        rig.utter("patrol 4 0.8 0.6")
        rig.run_until_idle(60000)
        msgs = rig.messages()
        assert msgs[-1] == "waiting for commands"
        assert any(m.startswith("successfully navigated") for m in msgs)
        # first ring vertex is straight ahead at the initial radius
        assert "looking for path to (0.8, 0.0)" in msgs

    def test_cancel_during_patrol_cancels_everything(self):
        rig = Rig(square_room(4.0))
        rig.utter("patrol")
        rig.run(100)
        rig.utter("cancel")
        rig.run(2)
        assert "canceled goal" in rig.messages()
        assert rig.ctrl.queue.is_idle()


class TestDeterminism:
    def run_once(self):
        rig = Rig(square_room(4.0), lidar_sigma=0.01, seed=7)
        rig.utter("go forward 1")
        rig.utter("turn left 45")
        rig.run_until_idle()
        return rig.messages(), rig.pose()

    def test_identical_runs(self):
        assert self.run_once() == self.run_once()
