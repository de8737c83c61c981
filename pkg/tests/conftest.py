from pathlib import Path

import pytest

from mask.behaviordb import BehaviorDatabase, GenerationManifest, PersonaSpec
from mask.catalog import OBSERVATION_COUNT, RobotState, face_by_name, motion_by_name
from mask.infuser import BUILTIN_PERSONAS, MockCompletionProvider, PromptTemplate, build_behavior_database

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
PERSONA_DIR = REPO_ROOT / "personas"


def build_manual_db(state_pairs, initial, successor, persona=None) -> BehaviorDatabase:
    """Hand-built database from (motion, face) names and successor(i, obs_index)."""
    states = [RobotState(motion_by_name(m), face_by_name(f)) for m, f in state_pairs]
    motions = []
    for s in states:
        if s.motion.name not in motions:
            motions.append(s.motion.name)
    transitions = [
        [successor(i, o) for o in range(OBSERVATION_COUNT)] for i in range(len(states))
    ]
    return BehaviorDatabase(
        persona=persona or PersonaSpec("TOY", "hand-built table for tests"),
        motions=motions,
        states=states,
        initial_state=initial,
        transitions=transitions,
        manifest=GenerationManifest(model="manual"),
    )


@pytest.fixture(scope="session")
def templates():
    return PromptTemplate.default()


@pytest.fixture()
def mock_provider():
    return MockCompletionProvider()


@pytest.fixture(scope="session")
def mock_dbs():
    """The four built-in personas compiled once per test session."""
    provider = MockCompletionProvider()
    return {
        name: build_behavior_database(persona, provider)
        for name, persona in BUILTIN_PERSONAS.items()
    }


@pytest.fixture(scope="session")
def shy_db(mock_dbs):
    return mock_dbs["TEST_SHY"]


@pytest.fixture(scope="session")
def echo_db():
    """Pipeline-built database for a persona no rule table knows: pure self-transitions."""
    persona = PersonaSpec("ECHO", "repeats whatever state it is in", seed=1)
    return build_behavior_database(persona, MockCompletionProvider())
