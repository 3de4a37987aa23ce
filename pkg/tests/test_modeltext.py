import pathlib
import random

import pytest

from rxm.modeltext import (
    ParseFailure,
    parse_model,
    parse_script,
    serialize_model,
    serialize_script,
    try_parse_model,
    try_parse_script,
)
from rxm.script import AssertProp, InjectStep, TickStep

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def fixture_text(name):
    return (FIXTURES / name).read_text()


ALL_MODELS = sorted(p.name for p in FIXTURES.glob("*.rxm"))
ALL_SCRIPTS = sorted(p.name for p in FIXTURES.glob("*.rxs"))


# ---------------------------------------------------------------------------
# parsing fixtures
# ---------------------------------------------------------------------------

def test_stage1_shape():
    bundle = parse_model(fixture_text("switch_stage1.rxm"))
    assert len(bundle.classes) == 3
    assert len(bundle.objects) == 3
    assert len(bundle.machines) == 0
    assert len(bundle.charts) == 1


def test_requirements_railcar_shape():
    bundle = parse_model(fixture_text("railcar_requirements.rxm"))
    assert len(bundle.machines) == 1
    assert len(bundle.charts) >= 5


@pytest.mark.parametrize("name", ALL_MODELS)
def test_all_fixture_models_parse(name):
    bundle = parse_model(fixture_text(name), name)
    assert bundle.validate() == []


def test_transition_to_undeclared_state_names_it():
    text = """
    class C { signal go/0; }
    object o : C;
    statechart S for C {
      in go/0;
      region r {
        initial a;
        state a { on go -> nowhere; }
      }
    }
    """
    bundle, errors = try_parse_model(text)
    assert bundle is None
    assert len(errors) == 1
    assert "nowhere" in errors[0].message


def test_multiple_independent_errors_all_reported():
    text = """
    class C {
      prop x: int = "oops";
      signal s/;
    }
    object o : ;
    chart Z {
      lifeline L : C = o;
      L -> : e() mon;
    }
    """
    bundle, errors = try_parse_model(text)
    assert bundle is None
    assert len(errors) >= 3


def test_error_position_points_at_token():
    text = "class C {\n  prop x: wat;\n}\n"
    _, errors = try_parse_model(text)
    assert errors
    assert errors[0].line == 2
    assert text.splitlines()[1][errors[0].col - 1:].startswith("wat")
    assert "wat" in errors[0].excerpt or "kind" in errors[0].message


def test_comments_and_strings():
    text = '''
    // leading comment
    class C {
      prop label: string = "a \\"quoted\\" value"; // trailing
    }
    object o : C;
    '''
    bundle = parse_model(text)
    assert bundle.classes[0].properties[0].default == 'a "quoted" value'


# ---------------------------------------------------------------------------
# round-trip laws
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ALL_MODELS)
def test_round_trip_structural_equality(name):
    bundle = parse_model(fixture_text(name), name)
    text = serialize_model(bundle)
    again = parse_model(text, name + "#canonical")
    assert again == bundle


@pytest.mark.parametrize("name", ALL_MODELS)
def test_serialize_idempotent(name):
    bundle = parse_model(fixture_text(name), name)
    once = serialize_model(bundle)
    twice = serialize_model(parse_model(once))
    assert once == twice


@pytest.mark.parametrize("name", ALL_SCRIPTS)
def test_script_round_trip(name):
    model_for = {
        "delay_trio.rxs": "delay_trio.rxm",
        "switch_light.rxs": "switch_stage1.rxm",
        "priority.rxs": "priority.rxm",
        "forbid.rxs": "forbid_machine.rxm",
        "railcar_arrival.rxs": "railcar.rxm",
        "railcar_retry.rxs": "railcar.rxm",
        "railcar_departure.rxs": "railcar.rxm",
        "kitchen_sink.rxs": "kitchen_sink.rxm",
    }[name]
    bundle = parse_model(fixture_text(model_for))
    script = parse_script(fixture_text(name), bundle, name)
    text = serialize_script(script)
    again = parse_script(text, bundle, name + "#canonical")
    assert again == script
    assert serialize_script(again) == text


# ---------------------------------------------------------------------------
# scripts
# ---------------------------------------------------------------------------

def test_script_parse_and_validation():
    bundle = parse_model(fixture_text("switch_stage1.rxm"))
    script = parse_script(
        'inject env switch1.click;\nassert light1.state == "on";\n', bundle)
    assert isinstance(script.steps[0], InjectStep)
    assert isinstance(script.steps[1], AssertProp)
    with pytest.raises(ParseFailure, match="does not declare"):
        parse_script("inject env switch1.bogus;", bundle)
    with pytest.raises(ParseFailure, match="unknown target"):
        parse_script("inject env ghost.click;", bundle)


def test_tick_duration_normalization():
    bundle = parse_model(fixture_text("switch_stage1.rxm"))
    script = parse_script("tick 1000ms;\ntick 1s;\ntick 1000;", bundle)
    assert [s.ms for s in script.steps] == [1000, 1000, 1000]
    assert all(isinstance(s, TickStep) for s in script.steps)


def test_script_block_wrapper_accepted():
    bundle = parse_model(fixture_text("switch_stage1.rxm"))
    script = parse_script("script { inject env switch1.click; }", bundle)
    assert len(script.steps) == 1


# ---------------------------------------------------------------------------
# totality
# ---------------------------------------------------------------------------

def test_parser_never_crashes_on_noise():
    rng = random.Random(1234)
    base = fixture_text("railcar.rxm")
    for trial in range(60):
        if trial % 3 == 0:
            junk = bytes(rng.randrange(256) for _ in range(rng.randrange(400)))
            text = junk.decode("utf-8", errors="replace")
        else:
            chars = list(base)
            for _ in range(rng.randrange(1, 40)):
                pos = rng.randrange(len(chars))
                chars[pos] = chr(rng.randrange(32, 127))
            text = "".join(chars)
        bundle, errors = try_parse_model(text)  # must not raise
        assert bundle is not None or errors
        try_parse_script(text, parse_model(fixture_text("switch_stage1.rxm")))
