#!/usr/bin/env python3
"""Regenerate the checked-in golden traces (mock TEST_SHY x every scenario).

Each trace is audited against the database before it is written; the test
suite then holds future runs to these exact bytes.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mask.engine import trace_to_jsonl
from mask.evalkit import audit_trace, load_scenario, run_scenario, state_visit_histogram
from mask.infuser import BUILTIN_PERSONAS, MockCompletionProvider, build_behavior_database
from mask.perception import PerceptionConfig

ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = ROOT / "scenarios"
GOLDEN_DIR = ROOT / "tests" / "golden"


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    db = build_behavior_database(BUILTIN_PERSONAS["TEST_SHY"], MockCompletionProvider())
    cfg = PerceptionConfig()
    for scene_path in sorted(SCENARIO_DIR.glob("*.scene.json")):
        scenario = load_scenario(scene_path)
        trace = run_scenario(scenario, db, cfg)
        problems = audit_trace(trace, db)
        assert not problems, f"{scenario.name}: {problems}"
        out = GOLDEN_DIR / f"{scenario.name}.TEST_SHY.trace.jsonl"
        out.write_text(trace_to_jsonl(trace), encoding="utf-8")
        hist = state_visit_histogram(trace)
        visits = ", ".join(f"{db.state_label(i)}={n}" for i, n in sorted(hist.items()))
        print(f"{out.name}: {len(trace)} events ({visits or 'no transitions'})")


if __name__ == "__main__":
    main()
