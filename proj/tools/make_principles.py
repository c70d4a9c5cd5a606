#!/usr/bin/env python3
# Copyright 2026 The WeaverForge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes data/principles/<Domain>/<Task>.json.

Nine curated principles plus one generic principle for every
(domain, task) bucket so that every bucket has a candidate.
"""

import json
import pathlib
import sys
from collections import defaultdict

DOMAINS = ["FictionWriting", "CreativeNonFiction", "MarketingWriting", "TechnicalWriting"]
TASKS = [
    "ContentWriting", "Outlining", "PolishingEditing", "StyleTransfer",
    "ExpandSimplify", "Brainstorming", "Reviewing", "InstructionAnnotation",
]

CURATED = [
    ("CreativeNonFiction", "Brainstorming",
     "Ideas should be grounded in a lived, specific experience rather than generic themes.",
     "Write about the night the power went out and we played cards by candlelight.",
     "Write about family.",
     "The idea names a concrete scene the writer can actually recall.",
     "The idea is a broad theme with no anchor in experience."),
    ("CreativeNonFiction", "ContentWriting",
     "Personal claims should be supported by a concrete detail.",
     "I was nervous: my hands left damp prints on the podium.",
     "I was very, very nervous.",
     "A physical detail makes the feeling believable.",
     "Intensifiers replace the evidence a reader needs."),
    ("TechnicalWriting", "StyleTransfer",
     "A register change must keep every quantity and unit unchanged.",
     "Latency fell from 120 ms to 72 ms after the change.",
     "Latency fell a lot after the change.",
     "The numbers survive the rewrite intact.",
     "The rewrite drops the figures that carried the meaning."),
    ("TechnicalWriting", "ContentWriting",
     "State the result before the procedure that produced it.",
     "Build time halved. We achieved this by caching dependencies.",
     "We did many things to the pipeline, and after that build time halved.",
     "The reader learns the outcome first.",
     "The outcome is buried after the process."),
    ("FictionWriting", "Outlining",
     "Each outline beat should change the situation of a character.",
     "- Mara finds the letter\n- She decides to answer it\n- The reply arrives unsigned",
     "- The library\n- A book\n- Some weather",
     "Every beat is an event that alters what the character faces.",
     "The beats are settings and objects, not developments."),
    ("FictionWriting", "ContentWriting",
     "Show a character's emotion through action instead of naming it.",
     "He lit the lamp anyway and waited.",
     "He felt determined and hopeful.",
     "The action implies the feeling.",
     "The emotion is labeled directly."),
    ("MarketingWriting", "ExpandSimplify",
     "A simplified message keeps the single strongest benefit.",
     "Tea ready when you wake up.",
     "A kettle with many features and settings.",
     "The benefit survives the compression.",
     "The benefit is lost and only the product remains."),
    ("MarketingWriting", "ContentWriting",
     "Copy should address the reader and name a concrete benefit.",
     "Your feet stay dry on every trail.",
     "Our boots are high quality.",
     "The line speaks to the reader about what they gain.",
     "The line praises the product without a benefit."),
    ("MarketingWriting", "PolishingEditing",
     "Edits must not introduce claims the original did not make.",
     "Built to last a decade.",
     "Built to last forever, guaranteed by experts.",
     "The edit tightens wording without new promises.",
     "The edit invents unverifiable claims."),
]

GENERIC = {
    "ContentWriting": ("The text should fulfil the request without padding.",
                       "A focused paragraph on the requested topic.",
                       "A paragraph that wanders off topic before returning."),
    "Outlining": ("Outline items should follow a logical order.",
                  "- Setup\n- Conflict\n- Resolution",
                  "- Resolution\n- Setup\n- Conflict"),
    "PolishingEditing": ("Editing should preserve the author's meaning.",
                         "The fog lifted at dawn.",
                         "The fog never lifted."),
    "StyleTransfer": ("The target style should be applied consistently.",
                      "Formal throughout: The results were satisfactory.",
                      "Formal then casual: The results were satisfactory, lol."),
    "ExpandSimplify": ("Simplification should keep the main point.",
                       "The pump broke because a sensor failed.",
                       "Something happened at the pump."),
    "Brainstorming": ("Brainstormed ideas should be distinct from one another.",
                      "1. A heist\n2. A wedding\n3. A shipwreck",
                      "1. A heist\n2. A robbery\n3. A theft"),
    "Reviewing": ("Feedback should be specific and actionable.",
                  "The second sentence repeats the first; cut it.",
                  "It could be better."),
    "InstructionAnnotation": ("An instruction should state the expected form of the output.",
                              "Write a three-sentence scene in the past tense.",
                              "Write something."),
}


def record(pid, domain, task, desc, good, bad, why_good, why_bad):
    return {
        "id": pid,
        "domain": domain,
        "task": task,
        "description": desc,
        "adhering_case": good,
        "violating_case": bad,
        "rationale_adhere": why_good,
        "rationale_violate": why_bad,
    }


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/principles")
    buckets = defaultdict(list)
    n = 0
    for domain, task, desc, good, bad, why_good, why_bad in CURATED:
        n += 1
        buckets[(domain, task)].append(record(f"P-{n:03d}", domain, task, desc, good, bad, why_good, why_bad))
    for domain in DOMAINS:
        for task in TASKS:
            n += 1
            desc, good, bad = GENERIC[task]
            buckets[(domain, task)].append(record(
                f"P-{n:03d}", domain, task, desc, good, bad,
                "The adhering case satisfies the principle.",
                "The violating case breaks the principle."))
    for (domain, task), items in sorted(buckets.items()):
        path = root / domain / f"{task}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(items, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
