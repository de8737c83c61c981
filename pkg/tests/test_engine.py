import pytest
from hypothesis import given
from hypothesis import strategies as st

from mask.behaviordb import deserialize, serialize
from mask.catalog import ObservationVector, observation_index
from mask.engine import BehaviorEngine, trace_from_jsonl, trace_to_jsonl
from mask.errors import SchemaError
from mask.perception import PerceptionConfig, PersonSnapshot, discretize

CFG = PerceptionConfig()


def person(pid=1, **kw):
    defaults = dict(
        left_hand_height=-0.4,
        right_hand_height=-0.4,
        gaze_angle=90.0,
        distance=5.0,
        hand_speed=0.0,
        radial_velocity=0.0,
        bearing=0.0,
    )
    defaults.update(kw)
    return PersonSnapshot(person_id=pid, **defaults)


def frame(*snaps):
    return [(s, discretize(s, CFG)) for s in snaps]


NEUTRAL = person()
SALIENT = person(right_hand_height=0.2, gaze_angle=5.0, distance=1.0, hand_speed=0.9,
                 radial_velocity=-0.5, bearing=0.4)


def test_reset_restores_initial_state(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(SALIENT), time=1.0)
    assert engine.current_state != shy_db.initial_state
    engine.reset(time=2.0)
    assert engine.current_state == shy_db.initial_state
    assert engine.poi is None


def test_reset_is_idempotent(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.reset(time=0.0)
    first = list(engine.trace)
    engine.reset(time=0.0)
    assert engine.trace == first


def test_trace_after_reset_has_exactly_one_reset_event(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(NEUTRAL), time=1.0)
    engine.reset(time=5.0)
    assert len(engine.trace) == 1
    assert engine.trace[0].trigger == "reset"
    assert engine.trace[0].to_state == shy_db.initial_state


def test_quiescence_same_poi_same_observation(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    assert engine.step(frame(NEUTRAL), time=1.0) is not None  # poi appears
    for t in (2.0, 3.0, 4.0):
        assert engine.step(frame(NEUTRAL), time=t) is None


def test_constant_stream_yields_at_most_one_change(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    events = [engine.step(frame(SALIENT), time=float(t)) for t in range(1, 20)]
    assert sum(e is not None for e in events) == 1


def test_echo_database_records_self_transitions(echo_db):
    engine = BehaviorEngine(echo_db, CFG)
    e1 = engine.step(frame(NEUTRAL), time=1.0)
    assert e1 is not None and e1.to_state == e1.from_state
    e2 = engine.step(frame(SALIENT), time=2.0)
    assert e2 is not None and e2.to_state == e2.from_state
    assert engine.current_state == echo_db.initial_state


def test_shy_threat_transition_fires(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(NEUTRAL), time=1.0)
    assert engine.database.states[engine.current_state].motion.name == "look around"
    threat = person(right_hand_height=0.2, gaze_angle=5.0, distance=1.0,
                    hand_speed=0.9, radial_velocity=-0.5)
    assert discretize(threat, CFG) == ObservationVector(1, "close", "gaze", "waving", "approach")
    event = engine.step(frame(threat), time=2.0)
    assert event is not None
    assert event.trigger == "observation_changed"
    state = shy_db.states[event.to_state]
    assert (state.motion.name, state.face.name) == ("hide away", "scared")


def test_poi_change_triggers_even_with_equal_observation(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    a, b = person(pid=1, distance=1.0), person(pid=2, distance=1.0, gaze_angle=5.0)
    engine.step(frame(a, b), time=1.0)  # b wins on curiosity
    assert engine.poi == 2
    # b leaves; a remains with an observation identical to the frame before.
    event = engine.step(frame(a), time=2.0)
    assert event is not None
    assert event.trigger == "poi_changed"
    assert event.poi == 1


def test_empty_frame_clears_poi_and_holds_state(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(SALIENT), time=1.0)
    state_before = engine.current_state
    assert engine.step([], time=2.0) is None
    assert engine.poi is None
    assert engine.current_state == state_before
    # Reappearance is a poi change even with the identical observation.
    event = engine.step(frame(SALIENT), time=3.0)
    assert event is not None and event.trigger == "poi_changed"


def test_event_matches_database_cell(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    event = engine.step(frame(SALIENT), time=1.0)
    cell = shy_db.transitions[event.from_state][observation_index(event.observation)]
    assert event.to_state == cell


def test_current_display_after_reset(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    motion, face, emoji, heading = engine.current_display()
    assert (motion, face) == ("look around", "neutral")
    assert emoji == "\U0001f610"
    assert heading == 0.0


def test_display_is_stable_between_steps(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(NEUTRAL), time=1.0)
    before = engine.current_display()
    engine.step(frame(NEUTRAL), time=2.0)  # quiescent
    assert engine.current_display() == before


def test_display_face_always_in_catalog(mock_dbs):
    from mask.catalog import FACES

    names = {f.name for f in FACES}
    for db in mock_dbs.values():
        engine = BehaviorEngine(db, CFG)
        engine.step(frame(SALIENT), time=1.0)
        assert engine.current_display()[1] in names


def test_heading_carried_on_events(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    event = engine.step(frame(SALIENT), time=1.0)
    assert event.heading == pytest.approx(0.4)
    assert engine.current_display()[3] == pytest.approx(0.4)


def test_replay_determinism_bytes(shy_db):
    frames = [frame(NEUTRAL), frame(SALIENT), frame(SALIENT), frame(), frame(NEUTRAL)]

    def run():
        engine = BehaviorEngine(shy_db, CFG)
        engine.reset(time=0.0)
        for t, fr in enumerate(frames, start=1):
            engine.step(fr, time=float(t))
        return trace_to_jsonl(engine.trace)

    assert run() == run()


def test_trace_jsonl_roundtrip(shy_db):
    engine = BehaviorEngine(shy_db, CFG)
    engine.step(frame(NEUTRAL), time=1.0)
    engine.step(frame(SALIENT), time=2.0)
    text = trace_to_jsonl(engine.trace)
    events = trace_from_jsonl(text)
    assert events == engine.trace
    assert trace_to_jsonl(events) == text


def test_trace_parse_rejects_garbage():
    with pytest.raises(SchemaError):
        trace_from_jsonl('{"time": 0}\n')
    with pytest.raises(SchemaError):
        trace_from_jsonl("not json\n")


# Session-scoped fixtures do not mix with hypothesis; cache the db at module level.
_WALK_DB: dict = {}


@given(walk=st.lists(st.integers(min_value=0, max_value=71), min_size=1, max_size=40))
def test_random_walks_stay_within_reachable_states(walk):
    from mask.behaviordb import reachable_states
    from mask.catalog import observation_from_index
    from mask.infuser import BUILTIN_PERSONAS, MockCompletionProvider, build_behavior_database

    db = _WALK_DB.setdefault(
        "db", build_behavior_database(BUILTIN_PERSONAS["TEST_SHY"], MockCompletionProvider())
    )
    reachable = reachable_states(db)
    engine = BehaviorEngine(db, CFG)
    visited = set()
    for t, obs_index in enumerate(walk, start=1):
        obs = observation_from_index(obs_index)
        event = engine.step([(person(pid=1), obs)], time=float(t))
        if event is not None:
            visited.add(event.to_state)
    assert visited <= reachable


def test_engine_state_survives_database_roundtrip(shy_db):
    # The engine behaves identically on a deserialized copy of its database.
    clone = deserialize(serialize(shy_db))
    e1, e2 = BehaviorEngine(shy_db, CFG), BehaviorEngine(clone, CFG)
    for t, fr in enumerate([frame(NEUTRAL), frame(SALIENT), frame(NEUTRAL)], start=1):
        r1, r2 = e1.step(fr, time=float(t)), e2.step(fr, time=float(t))
        assert (r1 is None) == (r2 is None)
    assert trace_to_jsonl(e1.trace) == trace_to_jsonl(e2.trace)
