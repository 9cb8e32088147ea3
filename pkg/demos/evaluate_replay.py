"""
Reproducible zero-shot evaluation
=================================

Record a scripted model once into a replay fixture, then evaluate against the
fixture. The same fixture gives the same report on every run, which is how
the evaluator is exercised without network access.
"""
import tempfile
from pathlib import Path

from graphreason import EvalConfig, MockChatClient, ReplayChatClient, TaskInstance, TextGraph, eval_run
from graphreason.client import RecordingChatClient
from graphreason.evaluator import render_table
from graphreason.graph import Edge

labels = ["cs.NI", "cs.IT", "cs.LG"]
queries = []
for i in range(6):
    g = TextGraph(((0, f"paper {i}"), (1, "a neighbour")), (Edge(0, 1),))
    queries.append(TaskInstance(id=f"p{i}", kind="node_classification", dataset="toy", graph=g,
                                targets=[0], label_space=labels, gold=labels[i % 3], target_noun="essay"))

# this stand-in model always answers cs.NI, so it is right on a third of the queries
scripted = MockChatClient(lambda prompt: "Answer: cs.NI\nBrief_reasoning: guess")
recorder = RecordingChatClient(scripted)
live = eval_run(queries, EvalConfig(), recorder)

fixture = Path(tempfile.mkdtemp()) / "replay.json"
recorder.save(fixture)
replayed = eval_run(queries, EvalConfig(), ReplayChatClient.from_file(fixture))

print(render_table([replayed]))
print("same as recorded run:", replayed == live)
for row in replayed.per_instance:
    print(f"  {row.id}: predicted {row.predicted}, gold {row.gold} -> {row.status}")
