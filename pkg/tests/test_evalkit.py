import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mask.engine import trace_to_jsonl
from mask.errors import SchemaError
from mask.evalkit import (
    SUCCESS_THRESHOLD,
    SurveyRecord,
    audit_trace,
    classification_accuracy,
    confusion_matrix,
    distinguishability_report,
    evaluation_report,
    load_scenario,
    load_survey_records,
    run_scenario,
    state_visit_histogram,
    weighted_classification_accuracy,
)
from mask.perception import PerceptionConfig

from conftest import GOLDEN_DIR, SCENARIO_DIR

CFG = PerceptionConfig()


def brute_force_confusion(records, characters):
    """Direct evaluation of the weighted-confusion formula with plain loops.

    Independent oracle: entry (i, j) sums score * [chosen == c_i] * [shown == c_j]
    over participants, divided by the score mass of column j.
    """
    k = len(characters)
    matrix = [[0.0] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            num = sum(
                r.fitting_score
                for r in records
                if r.chosen == characters[i] and r.shown == characters[j]
            )
            den = sum(r.fitting_score for r in records if r.shown == characters[j])
            matrix[i][j] = num / den if den > 0 else 0.0
    return matrix


def rec(shown, chosen, score, participant=0):
    return SurveyRecord(participant=participant, shown=shown, chosen=chosen, fitting_score=score)


HAND_RECORDS = [rec("A", "A", 100.0, 0), rec("A", "B", 50.0, 1), rec("B", "B", 80.0, 2)]


def test_hand_example_confusion_entries():
    cm = confusion_matrix(HAND_RECORDS, ["A", "B"])
    assert cm.value("A", "A") == pytest.approx(2 / 3, abs=1e-9)
    assert cm.value("B", "A") == pytest.approx(1 / 3, abs=1e-9)
    assert cm.value("A", "B") == pytest.approx(0.0, abs=1e-9)
    assert cm.value("B", "B") == pytest.approx(1.0, abs=1e-9)


def test_hand_example_matches_brute_force():
    cm = confusion_matrix(HAND_RECORDS, ["A", "B"])
    oracle = brute_force_confusion(HAND_RECORDS, ["A", "B"])
    assert np.allclose(cm.entries, oracle, atol=1e-12)


def test_all_correct_choices_give_identity():
    records = [rec(c, c, 10.0 * (i + 1), i) for i, c in enumerate("ABC")]
    cm = confusion_matrix(records, ["A", "B", "C"])
    assert np.allclose(cm.entries, np.eye(3))


characters_st = st.lists(st.sampled_from("ABCDEF"), min_size=2, max_size=6, unique=True)


@st.composite
def survey_records(draw):
    chars = draw(characters_st)
    n = draw(st.integers(min_value=1, max_value=30))
    records = [
        rec(
            draw(st.sampled_from(chars)),
            draw(st.sampled_from(chars)),
            draw(st.floats(min_value=1.0, max_value=100.0, allow_nan=False)),
            i,
        )
        for i in range(n)
    ]
    return chars, records


@given(survey_records())
def test_populated_columns_sum_to_one(data):
    chars, records = data
    cm = confusion_matrix(records, chars)
    shown = {r.shown for r in records}
    for j, c in enumerate(chars):
        if c in shown:
            assert abs(cm.entries[:, j].sum() - 1.0) <= 1e-9
        else:
            assert c in cm.absent_columns
            assert np.all(cm.entries[:, j] == 0.0)


@given(survey_records())
def test_matches_brute_force_oracle(data):
    chars, records = data
    cm = confusion_matrix(records, chars)
    assert np.allclose(cm.entries, brute_force_confusion(records, chars), atol=1e-9)


@given(survey_records(), st.floats(min_value=0.01, max_value=0.99))
def test_scale_invariance(data, factor):
    chars, records = data
    scaled = [dataclasses.replace(r, fitting_score=r.fitting_score * factor) for r in records]
    a = confusion_matrix(records, chars)
    b = confusion_matrix(scaled, chars)
    assert np.allclose(a.entries, b.entries, atol=1e-9)


def test_unknown_chosen_character_is_input_error():
    with pytest.raises(ValueError):
        confusion_matrix([rec("A", "Z", 50.0)], ["A", "B"])
    with pytest.raises(ValueError):
        confusion_matrix([rec("Z", "A", 50.0)], ["A", "B"])


def test_fitting_score_bounds_enforced():
    with pytest.raises(ValueError):
        rec("A", "A", -1.0)
    with pytest.raises(ValueError):
        rec("A", "A", 100.5)


def test_accuracy_all_correct():
    records = [rec(c, c, 50.0, i) for i, c in enumerate("ABAB")]
    assert classification_accuracy(records) == 1.0


def test_accuracy_two_of_three():
    assert classification_accuracy(HAND_RECORDS) == pytest.approx(2 / 3, abs=1e-9)


def test_accuracy_empty_is_error():
    with pytest.raises(ValueError):
        classification_accuracy([])


@given(survey_records())
def test_accuracy_is_permutation_invariant(data):
    _, records = data
    assert classification_accuracy(records) == classification_accuracy(records[::-1])


def test_threshold_flag_straddles_067():
    sixty_six = [rec("A", "A", 50.0, i) for i in range(66)] + [
        rec("A", "B", 50.0, 100 + i) for i in range(34)
    ]
    sixty_seven = [rec("A", "A", 50.0, i) for i in range(67)] + [
        rec("A", "B", 50.0, 100 + i) for i in range(33)
    ]
    low = evaluation_report(sixty_six, ["A", "B"])
    high = evaluation_report(sixty_seven, ["A", "B"])
    assert low["accuracy"] == pytest.approx(0.66)
    assert not low["meets_success_threshold"]
    assert high["accuracy"] == pytest.approx(0.67)
    assert high["meets_success_threshold"]
    assert SUCCESS_THRESHOLD == 0.67


def test_weighted_accuracy_differs_when_scores_skew():
    records = [rec("A", "A", 100.0, 0), rec("A", "B", 10.0, 1)]
    assert classification_accuracy(records) == 0.5
    assert weighted_classification_accuracy(records) == pytest.approx(100 / 110)


def test_survey_records_load_and_reject(tmp_path):
    path = tmp_path / "records.json"
    path.write_text(json.dumps([
        {"participant": 0, "shown": "A", "chosen": "A", "fitting_score": 100},
        {"participant": 1, "shown": "A", "chosen": "B", "fitting_score": 50},
    ]))
    records = load_survey_records(path)
    assert len(records) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([{"shown": "A"}]))
    with pytest.raises(SchemaError):
        load_survey_records(bad)


# --- scenarios and traces ---------------------------------------------------


def test_scenario_files_load():
    for path in sorted(SCENARIO_DIR.glob("*.scene.json")):
        scenario = load_scenario(path)
        assert scenario.frames, scenario.name


def test_scenario_requires_increasing_timestamps(tmp_path):
    doc = {
        "name": "bad",
        "frames": [
            {"time": 1.0, "persons": []},
            {"time": 1.0, "persons": []},
        ],
    }
    path = tmp_path / "bad.scene.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        load_scenario(path)


def test_scenario_schema_error_names_path(tmp_path):
    doc = {"name": "bad", "frames": [{"time": 0.5, "persons": [{"person_id": 1}]}]}
    path = tmp_path / "bad.scene.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError) as err:
        load_scenario(path)
    assert "$.frames[0].persons[0]" in str(err.value)


def test_empty_scenario_gives_reset_only_trace(shy_db):
    from mask.evalkit import Scenario

    trace = run_scenario(Scenario("empty", ()), shy_db, CFG)
    assert len(trace) == 1
    assert trace[0].trigger == "reset"


def test_constant_scenario_quiesces(shy_db):
    scenario = load_scenario(SCENARIO_DIR / "constant_stare.scene.json")
    trace = run_scenario(scenario, shy_db, CFG)
    assert sum(e.trigger != "reset" for e in trace) <= 1


def test_golden_traces_reproduce_exactly(shy_db):
    for scene_path in sorted(SCENARIO_DIR.glob("*.scene.json")):
        scenario = load_scenario(scene_path)
        trace = run_scenario(scenario, shy_db, CFG)
        golden = (GOLDEN_DIR / f"{scenario.name}.TEST_SHY.trace.jsonl").read_text(encoding="utf-8")
        assert trace_to_jsonl(trace) == golden, scenario.name


def test_golden_traces_pass_audit(shy_db):
    for scene_path in sorted(SCENARIO_DIR.glob("*.scene.json")):
        trace = run_scenario(load_scenario(scene_path), shy_db, CFG)
        assert audit_trace(trace, shy_db) == []


def test_auditor_flags_tampered_trace(shy_db):
    scenario = load_scenario(SCENARIO_DIR / "greet_approach_leave.scene.json")
    trace = run_scenario(scenario, shy_db, CFG)
    tampered = list(trace)
    victim = tampered[2]
    tampered[2] = dataclasses.replace(victim, to_state=(victim.to_state + 1) % len(shy_db.states))
    problems = audit_trace(tampered, shy_db)
    assert problems
    assert any("does not match" in p for p in problems)


def test_auditor_flags_illegal_trigger(shy_db):
    trace = run_scenario(load_scenario(SCENARIO_DIR / "idle_pass_by.scene.json"), shy_db, CFG)
    tampered = list(trace)
    tampered[1] = dataclasses.replace(tampered[1], trigger="cosmic_ray")
    assert any("illegal trigger" in p for p in audit_trace(tampered, shy_db))


def test_auditor_requires_leading_reset(shy_db):
    trace = run_scenario(load_scenario(SCENARIO_DIR / "idle_pass_by.scene.json"), shy_db, CFG)
    assert audit_trace(trace[1:], shy_db)


def test_histogram_conservation(shy_db):
    scenario = load_scenario(SCENARIO_DIR / "greet_approach_leave.scene.json")
    trace = run_scenario(scenario, shy_db, CFG)
    hist = state_visit_histogram(trace)
    assert sum(hist.values()) == sum(e.trigger != "reset" for e in trace)


def test_histogram_empty_for_reset_only(shy_db):
    from mask.evalkit import Scenario

    trace = run_scenario(Scenario("empty", ()), shy_db, CFG)
    assert state_visit_histogram(trace) == {}


def test_histogram_echo_database_mass_on_initial(echo_db):
    scenario = load_scenario(SCENARIO_DIR / "greet_approach_leave.scene.json")
    trace = run_scenario(scenario, echo_db, CFG)
    hist = state_visit_histogram(trace)
    assert set(hist) == {echo_db.initial_state}


# --- distinguishability -----------------------------------------------------


def test_distance_matrix_properties(mock_dbs):
    names, distances = distinguishability_report(list(mock_dbs.values()))
    assert names == list(mock_dbs)
    assert np.allclose(distances, distances.T)
    assert np.all(np.diag(distances) == 0)
    assert np.all(distances >= 0)


def test_all_builtin_pairs_distinguishable(mock_dbs):
    _, distances = distinguishability_report(list(mock_dbs.values()))
    k = len(mock_dbs)
    offdiag = [distances[a, b] for a in range(k) for b in range(a + 1, k)]
    assert len(offdiag) == 6
    assert all(d > 0 for d in offdiag)


def test_distance_to_self_is_zero(shy_db):
    _, distances = distinguishability_report([shy_db, shy_db])
    assert distances[0, 1] == 0.0


def test_distinguishability_needs_two(shy_db):
    with pytest.raises(ValueError):
        distinguishability_report([shy_db])
