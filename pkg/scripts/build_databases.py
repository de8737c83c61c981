#!/usr/bin/env python3
"""Compile the four built-in test personas with the mock provider.

Writes databases/<NAME>.maskdb.json at the repo root. Output is byte-stable:
rerunning must not change the files.
"""

import hashlib
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mask.behaviordb import serialize, validate
from mask.infuser import BUILTIN_PERSONAS, MockCompletionProvider, build_behavior_database

OUT_DIR = Path(__file__).resolve().parent.parent / "databases"


def main():
    OUT_DIR.mkdir(exist_ok=True)
    provider = MockCompletionProvider()
    for name, persona in BUILTIN_PERSONAS.items():
        db = build_behavior_database(persona, provider)
        report = validate(db)
        assert report.ok, f"{name}: {report.summary()}"
        payload = serialize(db)
        path = OUT_DIR / f"{name}.maskdb.json"
        path.write_bytes(payload)
        print(f"{path.name}: {len(db.states)} states, sha256 {hashlib.sha256(payload).hexdigest()[:16]}")


if __name__ == "__main__":
    main()
