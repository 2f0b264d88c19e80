import math
import random

import pytest

from deskbot.geometry import Pose2D, Segment2D, point_segment_distance
from deskbot.world import (
    NO_RETURN,
    Fiducial,
    RobotState,
    Simulator,
    WorldFileError,
    WorldSpec,
    detect_fiducials,
    parse_world,
    scan,
    square_room,
    step,
)

EMPTY = WorldSpec(bounds=(-10, -10, 10, 10), walls=(), fiducials=(),
                  robot_start=Pose2D(0, 0, 0))


class TestStep:
    def test_straight_line(self):
        s = step(EMPTY, RobotState(pose=Pose2D(0, 0, 0)), (1.0, 0.0), dt=1.0,
                 v_max=1.0)
        assert (s.pose.x, s.pose.y, s.pose.theta) == pytest.approx((1, 0, 0))

    def test_pure_rotation(self):
        s = step(EMPTY, RobotState(pose=Pose2D(0, 0, 0)), (0.0, math.pi / 2),
                 dt=1.0, omega_max=4.0)
        assert s.pose.theta == pytest.approx(math.pi / 2)
        assert (s.pose.x, s.pose.y) == pytest.approx((0, 0))

    def test_zero_command_is_identity(self):
        start = RobotState(pose=Pose2D(1.5, -2.0, 0.7))
        s = step(EMPTY, start, (0.0, 0.0), dt=0.05)
        assert s.pose == start.pose

    def test_stops_at_wall_contact(self):
        # Wall at x = 0.5 straight ahead: contact at 0.5 - radius = 0.35.
        world = WorldSpec(bounds=(-2, -2, 2, 2),
                          walls=(Segment2D(0.5, -1, 0.5, 1),),
                          fiducials=(), robot_start=Pose2D(0, 0, 0))
        s = step(world, RobotState(pose=Pose2D(0, 0, 0)), (1.0, 0.0), dt=1.0,
                 v_max=1.0, robot_radius=0.15)
        assert s.collided
        assert s.v == 0.0
        assert s.pose.x == pytest.approx(0.35, abs=1e-6)

    def test_velocity_clamped(self):
        s = step(EMPTY, RobotState(pose=Pose2D(0, 0, 0)), (5.0, 0.0), dt=1.0,
                 v_max=0.22)
        assert s.pose.x == pytest.approx(0.22)

    def test_never_penetrates_walls_under_fuzzing(self):
        world = square_room(2.0)
        rng = random.Random(3)
        state = RobotState(pose=world.robot_start)
        for _ in range(2000):
            cmd = (rng.uniform(-0.3, 0.3), rng.uniform(-3, 3))
            state = step(world, state, cmd, dt=0.05)
            for wall in world.walls:
                assert point_segment_distance(state.pose.x, state.pose.y,
                                              wall) >= 0.15 - 1e-6


class TestScan:
    def test_square_room_from_center(self):
        world = square_room(4.0)
        s = scan(world, Pose2D(0, 0, 0), beams=360, max_range=3.5)
        assert s.ranges[0] == pytest.approx(2.0, abs=1e-9)       # +x
        assert s.ranges[90] == pytest.approx(2.0, abs=1e-9)      # +y
        assert s.ranges[45] == pytest.approx(2 * math.sqrt(2), abs=1e-9)

    def test_offset_pose(self):
        world = square_room(4.0)
        s = scan(world, Pose2D(1, 0, 0), beams=360, max_range=3.5)
        assert s.ranges[0] == pytest.approx(1.0, abs=1e-9)
        assert s.ranges[180] == pytest.approx(3.0, abs=1e-9)

    def test_no_return_sentinel(self):
        s = scan(EMPTY, Pose2D(0, 0, 0), beams=8, max_range=3.5)
        assert all(r == NO_RETURN for r in s.ranges)

    def test_quarter_turn_symmetry_in_square_room(self):
        world = square_room(4.0)
        s = scan(world, Pose2D(0, 0, 0), beams=360, max_range=3.5)
        for i in range(360):
            assert s.ranges[i] == pytest.approx(s.ranges[(i + 90) % 360],
                                                abs=1e-6)

    def test_noise_stays_in_range(self):
        world = square_room(4.0)
        rng = random.Random(1)
        s = scan(world, Pose2D(0, 0, 0), beams=360, max_range=3.5, sigma=0.5,
                 rng=rng)
        for r in s.ranges:
            assert 0 < r <= 3.5

    def test_beam_angles_relative_to_heading(self):
        world = square_room(4.0)
        s = scan(world, Pose2D(0, 0, math.pi / 2), beams=360, max_range=3.5)
        # beam 0 now points along +y
        assert s.ranges[0] == pytest.approx(2.0, abs=1e-9)


class TestDetectFiducials:
    def room_with(self, *fids):
        return square_room(4.0, fiducials=tuple(
            Fiducial(i, Pose2D(*p)) for i, p in fids))

    def test_reported_once(self):
        world = self.room_with((7, (1, 0, 0)))
        obs, seen = detect_fiducials(world, Pose2D(0, 0, 0), frozenset())
        assert [o.id for o in obs] == [7]
        obs2, seen2 = detect_fiducials(world, Pose2D(0, 0, 0), seen)
        assert obs2 == []
        assert seen2 == seen == frozenset({7})

    def test_behind_robot_not_reported(self):
        world = self.room_with((7, (-1, 0, 0)))
        obs, _ = detect_fiducials(world, Pose2D(0, 0, 0), frozenset())
        assert obs == []

    def test_occluded_not_reported(self):
        world = WorldSpec(bounds=(-4, -4, 4, 4),
                          walls=(Segment2D(0.5, -1, 0.5, 1),),
                          fiducials=(Fiducial(3, Pose2D(1, 0, 0)),),
                          robot_start=Pose2D(0, 0, 0))
        obs, _ = detect_fiducials(world, Pose2D(0, 0, 0), frozenset())
        assert obs == []
        # same marker, viewed past the wall's end, is visible
        obs, _ = detect_fiducials(world, Pose2D(0.5, 1.5, -math.pi / 2),
                                  frozenset())
        assert [o.id for o in obs] == [3]

    def test_out_of_range(self):
        world = self.room_with((4, (1.9, 0, 0)))
        obs, _ = detect_fiducials(world, Pose2D(0, 0, 0), frozenset(),
                                  cam_range=1.5)
        assert obs == []

    def test_seen_set_monotone(self):
        world = self.room_with((1, (1, 0, 0)), (2, (1, 1, 0)), (3, (-1, 0, 0)))
        seen = frozenset()
        rng = random.Random(5)
        for _ in range(50):
            pose = Pose2D(rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-math.pi, math.pi))
            obs, new_seen = detect_fiducials(world, pose, seen)
            assert {o.id for o in obs}.isdisjoint(seen)
            assert new_seen >= seen
            seen = new_seen


class TestWorldFile:
    GOOD = """
# a small arena
bounds -2 -2 2 2
start 0 0 0
wall -2 -2 2 -2
wall 2 -2 2 2
fiducial 5 1 1 0.5
"""

    def test_parse_round_trip(self):
        world = parse_world(self.GOOD, source="good.world")
        assert world.bounds == (-2, -2, 2, 2)
        assert len(world.walls) == 2
        assert world.fiducials[0].id == 5
        assert world.robot_start == Pose2D(0, 0, 0)

    def test_error_carries_line_number(self):
        bad = "bounds -2 -2 2 2\nstart 0 0 0\nwall 1 2 3\n"
        with pytest.raises(WorldFileError, match=r"bad\.world:3"):
            parse_world(bad, source="bad.world")

    def test_unknown_directive(self):
        with pytest.raises(WorldFileError, match="unknown directive"):
            parse_world("bounds -1 -1 1 1\nstart 0 0 0\nlava 0 0\n")

    def test_missing_bounds(self):
        with pytest.raises(WorldFileError, match="missing 'bounds'"):
            parse_world("start 0 0 0\n")

    def test_duplicate_fiducial_ids(self):
        text = "bounds -2 -2 2 2\nstart 0 0 0\nfiducial 1 0 1 0\nfiducial 1 1 0 0\n"
        with pytest.raises(WorldFileError, match="duplicate"):
            parse_world(text)


class TestSimulator:
    def test_deterministic_given_seed(self):
        def run():
            sim = Simulator(square_room(4.0), seed=42, lidar_sigma=0.02)
            out = []
            for i in range(100):
                sim.set_command(0.2, 0.5)
                sim.step()
                if i % 5 == 0:
                    out.append(sim.lidar(i).ranges[:5])
            return sim.state.pose, out

        assert run() == run()

    def test_rejects_start_inside_wall(self):
        world = WorldSpec(bounds=(-2, -2, 2, 2),
                          walls=(Segment2D(0, -1, 0, 1),),
                          fiducials=(), robot_start=Pose2D(0.05, 0, 0))
        with pytest.raises(ValueError, match="start pose"):
            Simulator(world)
