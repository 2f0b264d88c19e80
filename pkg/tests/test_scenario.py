import pytest

from deskbot.config import RunConfig
from deskbot.scenario import (
    ScriptError,
    ScriptStep,
    parse_script,
    run_scenario,
)
from deskbot.world import square_room

FORWARD_SCRIPT = """
# drive one meter, confirm the report
@5 utter "go forward"
@10 expect "looking for path to (1.0, 0.0)"
@10 expect "successfully navigated to (1.0, 0.0)"
"""


def cfg(**kw):
    kw.setdefault("lidar_beams", 90)
    return RunConfig(**kw)


class TestScriptParsing:
    def test_parses_all_directives(self):
        text = ('@5 utter "go forward"\n'
                '@10 point 0.5 1.5 perspective\n'
                '@15 choose go_back\n'
                '@20 expect "waiting for commands"\n')
        steps = parse_script(text)
        assert [s.kind for s in steps] == ["utter", "point", "choose", "expect"]
        assert steps[1].view == "perspective"
        assert steps[2].choice == "go_back"

    def test_comments_and_blanks_skipped(self):
        assert parse_script("\n# hello\n\n") == []

    def test_error_carries_line_number(self):
        with pytest.raises(ScriptError, match="s:2"):
            parse_script('@1 utter "ok"\n@2 fly away\n', source="s")

    def test_bad_tick(self):
        with pytest.raises(ScriptError, match="bad tick"):
            parse_script("@x utter \"hi\"\n")

    def test_bad_choice(self):
        with pytest.raises(ScriptError, match="choose"):
            parse_script("@1 choose maybe\n")


class TestRunScenario:
    def test_empty_script_trivially_passes(self):
        result = run_scenario(square_room(4.0), cfg(), [])
        assert result.ok
        assert result.failures == []

    def test_forward_script_passes(self):
        steps = parse_script(FORWARD_SCRIPT)
        result = run_scenario(square_room(4.0), cfg(), steps)
        assert result.ok, result.failures

    def test_wrong_expected_string_fails(self):
        steps = parse_script('@5 utter "go forward"\n'
                             '@6 expect "made it to the moon"\n')
        result = run_scenario(square_room(4.0), cfg(), steps,
                              timeout_ticks=400)
        assert not result.ok
        assert "made it to the moon" in result.failures[0]

    def test_transcript_is_deterministic(self):
        steps = parse_script(FORWARD_SCRIPT)
        runs = [run_scenario(square_room(4.0), cfg(seed=3), steps)
                for _ in range(3)]
        assert runs[0].ok
        assert runs[0].transcript == runs[1].transcript == runs[2].transcript

    def test_transcript_carries_all_channels(self):
        steps = parse_script(FORWARD_SCRIPT)
        result = run_scenario(square_room(4.0), cfg(), steps)
        keys = {line.split()[1] for line in result.transcript}
        assert {"Map", "Odom", "Kirby", "Kirby_Feedback"} <= keys

    def test_pointer_and_choice_steps(self):
        # point at ros (1, 0.5) and send the robot there
        steps = parse_script('@5 point -0.5 1.0\n'
                             '@6 utter "go there"\n'
                             '@7 expect "successfully navigated to (1.0, 0.5)"\n')
        result = run_scenario(square_room(4.0), cfg(), steps)
        assert result.ok, result.failures

    def test_expects_must_match_in_order(self):
        steps = [
            ScriptStep(5, 1, "utter", text="go forward"),
            ScriptStep(6, 2, "expect",
                       text="successfully navigated to (1.0, 0.0)"),
            ScriptStep(6, 3, "expect", text="looking for path to (1.0, 0.0)"),
        ]
        result = run_scenario(square_room(4.0), cfg(), steps,
                              timeout_ticks=400)
        assert not result.ok  # "looking" precedes "navigated" in the stream
