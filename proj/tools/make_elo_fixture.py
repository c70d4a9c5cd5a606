# Copyright 2026 The WeaverForge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the 200-record comparison fixture and its reference Elo ratings.

The ratings come from a plain sequential fold written independently of the
C++ implementation; the C++ tests compare against them exactly.
"""
import json
import random
import sys
from pathlib import Path

MODELS = ["atlas-7b", "birch-13b", "cedar-70b", "delta-chat", "ember-mini"]
DIMENSIONS = ["creativity", "style", "relevance", "fluency", "overall"]
VERDICTS = ["A", "B", "Tie"]


def make_records(n=200, seed=20240131):
    rng = random.Random(seed)
    records = []
    for i in range(n):
        a, b = rng.sample(MODELS, 2)
        records.append({
            "id": "cmp-%04d" % i,
            "instruction_id": "w%02d" % rng.randrange(20),
            "model_a": a,
            "model_b": b,
            "verdict": rng.choices(VERDICTS, weights=[4, 4, 2])[0],
            "dimension": rng.choice(DIMENSIONS),
            "annotator": "ann%d" % rng.randrange(6),
            # Repeated timestamps exercise the id tiebreak.
            "timestamp": rng.randrange(120),
        })
    rng.shuffle(records)
    return records


def fold(records, initial=1500.0, k=32.0):
    tables = {}
    for r in sorted(records, key=lambda r: (r["timestamp"], r["id"])):
        t = tables.setdefault(r["dimension"], {})
        ra = t.setdefault(r["model_a"], initial)
        rb = t.setdefault(r["model_b"], initial)
        ea = 1.0 / (1.0 + 10.0 ** ((rb - ra) / 400.0))
        eb = 1.0 / (1.0 + 10.0 ** ((ra - rb) / 400.0))
        sa = {"A": 1.0, "B": 0.0, "Tie": 0.5}[r["verdict"]]
        t[r["model_a"]] = ra + k * (sa - ea)
        t[r["model_b"]] = rb + k * ((1.0 - sa) - eb)
    return tables


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = make_records()
    with open(out / "elo_200.jsonl", "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    with open(out / "elo_200_expected.json", "w") as f:
        json.dump(fold(records), f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
