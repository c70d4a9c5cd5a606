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

"""Writes data/exemplars/<subdomain>/<Task>.json (five cases per bucket)."""

import json
import pathlib
import sys

TASKS = [
    "ContentWriting", "Outlining", "PolishingEditing", "StyleTransfer",
    "ExpandSimplify", "Brainstorming", "Reviewing", "InstructionAnnotation",
]

# (subdomain, domain, [(excerpt, selected sentence index)])
SOURCES = {
    "short_story": ("FictionWriting", [
        "The lighthouse keeper counted the ships each evening. "
        "Tonight there were none, and the silence on the water felt like a held breath. "
        "He lit the lamp anyway and waited for the fog to lift.",
        "Mara found the letter folded inside a library book about beekeeping. "
        "It was addressed to nobody and signed with a single pressed clover. "
        "She read it twice before deciding to answer.",
        "The train stopped between two stations for no reason anyone could name. "
        "Passengers looked up from their phones and, one by one, began to talk. "
        "By the time it moved again, three of them had exchanged addresses.",
        "Old Ferris kept a clock in every room, each set to a different city. "
        "Visitors assumed he was a traveler, but he had never left the valley. "
        "He simply liked to know what time it was somewhere else.",
        "The café on Rue Verte served only one dish a day, chosen by the cook's mood. "
        "On Tuesdays the mood was usually soup. "
        "Nobody complained, because the soup was always exactly what they needed.",
    ]),
    "blog": ("CreativeNonFiction", [
        "I started running at forty, mostly out of spite. "
        "My doctor said my knees would not thank me, and I wanted to prove him wrong. "
        "Three years later my knees are fine and my spite has turned into joy.",
        "Every spring my grandmother planted more tomatoes than any family could eat. "
        "The surplus went to neighbors, the church, and once to a startled mail carrier. "
        "I understand now that the garden was never really about tomatoes.",
        "Moving to a new city at thirty felt like being a teenager again. "
        "I did not know where to buy bread or which bus went downtown. "
        "Slowly the map in my head filled in, street by street.",
        "My first sourdough starter died after a week of neglect. "
        "The second one lived for two years and traveled with me across three apartments. "
        "I named it Gerald, which felt appropriate for something so stubborn.",
        "Learning to draw as an adult is humbling in the best way. "
        "My early sketches of hands looked like bundles of sausages. "
        "Today they look like slightly better bundles of sausages, and that counts as progress.",
    ]),
    "advertising_copy": ("MarketingWriting", [
        "Meet the kettle that remembers how you like your tea. "
        "Set your favorite temperature once and it will be ready every morning. "
        "Better tea, with one less thing to think about.",
        "Our hiking boots are tested on real trails, not in a lab. "
        "Every pair is waterproof, lightweight, and built to last a decade. "
        "Go further and worry less about your feet.",
        "Fresh bread delivered before your alarm goes off. "
        "Our bakers start at three so your breakfast can start at seven. "
        "Subscribe today and the first week is on us.",
        "This backpack has a pocket for everything and a place for nothing to get lost. "
        "Padded straps keep long commutes comfortable. "
        "Pack it once and forget about it.",
        "The reading lamp that adjusts to the hour. "
        "Warm light in the evening helps you wind down, bright light in the morning helps you focus. "
        "Your eyes will notice the difference on day one.",
    ]),
    "report": ("TechnicalWriting", [
        "The migration moved all customer records to the new database cluster. "
        "Read latency fell by forty percent while write latency stayed flat. "
        "No data loss was observed during the cutover window.",
        "Survey responses were collected from 412 participants over six weeks. "
        "Most respondents reported using the tool at least twice a week. "
        "Satisfaction was highest among users who completed the tutorial.",
        "The pump station failed twice in March because of a faulty pressure sensor. "
        "Replacing the sensor restored normal operation within two hours each time. "
        "We recommend quarterly inspections for all sensors of this model.",
        "Energy use in the east building dropped after the lighting retrofit. "
        "Monthly consumption averaged eleven percent lower than the prior year. "
        "Occupancy was similar across both periods, so the change is attributable to the retrofit.",
        "The build pipeline now caches dependencies between runs. "
        "Median build time decreased from fourteen minutes to six. "
        "Cache invalidation is triggered whenever the lockfile changes.",
    ]),
}


def sentences(excerpt):
    out, start = [], 0
    for i, ch in enumerate(excerpt):
        if ch in ".!?" and (i + 1 == len(excerpt) or excerpt[i + 1] == " "):
            out.append((start, i + 1))
            start = i + 2
    return out


def byte_range(excerpt, begin, end):
    return len(excerpt[:begin].encode("utf-8")), len(excerpt[:end].encode("utf-8"))


def degrade(span):
    words = span.split(" ")
    if len(words) > 3:
        words[1], words[2] = words[2], words[1]
    return " ".join(words).replace(".", "") + " ."


def make_case(subdomain, domain, task, excerpt, k):
    ranges = sentences(excerpt)
    b, e = ranges[k % len(ranges)]
    span = excerpt[b:e]
    kind = subdomain.replace("_", " ")
    context = None
    if task == "ContentWriting":
        instruction = f"Write a single sentence for a {kind} conveying this idea: {span[:40].rstrip()}..."
        response = span
        rationale = "The span stands on its own, so the instruction asks for it directly."
    elif task == "Outlining":
        instruction = f"Outline the key beats of this {kind} passage as a short list."
        response = "\n".join(f"- {excerpt[x:y].rstrip('.')}" for x, y in ranges)
        rationale = "The passage has a clear sequence that maps onto a short outline."
    elif task == "PolishingEditing":
        context = degrade(span)
        instruction = "Polish the sentence in the context: fix word order and punctuation."
        response = span
        rationale = "A lightly damaged copy of the span makes a natural editing request."
    elif task == "StyleTransfer":
        context = span
        instruction = "Rewrite the context in a formal register, keeping its meaning."
        response = "In formal terms: " + span[0].lower() + span[1:]
        rationale = "The sentence has a distinct voice that can be shifted to another register."
    elif task == "ExpandSimplify":
        context = span
        instruction = "Simplify the context for a young reader."
        response = "Put simply, " + span[0].lower() + span[1:]
        rationale = "The sentence can be restated in plainer words without losing the point."
    elif task == "Brainstorming":
        instruction = f"Brainstorm three directions a {kind} could take from this moment."
        response = "1. Follow the consequence.\n2. Introduce a contrasting voice.\n3. Revisit the opening image."
        rationale = "The span suggests several ways to continue, which suits idea generation."
    elif task == "Reviewing":
        context = span
        instruction = "Review the context and give one strength and one suggestion."
        response = "Strength: the sentence is concrete. Suggestion: add a sensory detail."
        rationale = "A single sentence is enough material for a brief critique."
    else:
        instruction = f"Write a task description that would lead a writer to produce this {kind} excerpt."
        response = f"Write a short {kind} passage of three sentences with a clear turn in the middle."
        rationale = "The excerpt implies the brief that produced it."
    sb, se = byte_range(excerpt, b, e)
    return {
        "task": task,
        "domain": domain,
        "subdomain": subdomain,
        "source_excerpt": excerpt,
        "selected_span": {"start": sb, "end": se},
        "context": context,
        "instruction": instruction,
        "response": response,
        "rationale": rationale,
    }


def main():
    root = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/exemplars")
    for subdomain, (domain, excerpts) in SOURCES.items():
        for t, task in enumerate(TASKS):
            cases = [make_case(subdomain, domain, task, x, k + t) for k, x in enumerate(excerpts)]
            path = root / subdomain / f"{task}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(cases, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
