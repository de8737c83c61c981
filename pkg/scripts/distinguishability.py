#!/usr/bin/env python3
"""Pairwise signature distances among compiled personas.

Usage: distinguishability.py [db.maskdb.json ...]
With no arguments, compiles the four built-in test personas with the mock
provider and compares those.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mask.behaviordb import deserialize
from mask.evalkit import distinguishability_report
from mask.infuser import BUILTIN_PERSONAS, MockCompletionProvider, build_behavior_database


def main(argv):
    if argv:
        dbs = [deserialize(Path(arg).read_bytes()) for arg in argv]
    else:
        provider = MockCompletionProvider()
        dbs = [build_behavior_database(p, provider) for p in BUILTIN_PERSONAS.values()]
    names, distances = distinguishability_report(dbs)
    width = max(len(n) for n in names)
    header = " " * (width + 2) + "  ".join(f"{n:>{width}}" for n in names)
    print(header)
    for i, name in enumerate(names):
        row = "  ".join(f"{distances[i, j]:>{width}.2f}" for j in range(len(names)))
        print(f"{name:>{width}}  {row}")
    pairs = [
        (names[a], names[b], distances[a, b])
        for a in range(len(names))
        for b in range(a + 1, len(names))
    ]
    closest = min(pairs, key=lambda p: p[2])
    print(f"\nclosest pair: {closest[0]} vs {closest[1]} (L1 = {closest[2]:.2f})")


if __name__ == "__main__":
    main(sys.argv[1:])
