"""
Building a small reasoning corpus offline
=========================================

A scripted client stands in for the reasoning model. One query gets a good
trace, one a wrong answer, and one targets an isolated paper, so each of the
three filters gets a say.
"""
import json
import tempfile
from pathlib import Path

from graphreason import CurationConfig, MockChatClient, TaskInstance, build_corpus, load_graph

graph = load_graph(Path(__file__).parent / "data" / "citations.json")
labels = ["cs.NI", "cs.IT", "cs.LG"]
queries = [
    TaskInstance(id="good", kind="node_classification", dataset="toy", graph=graph, targets=[3],
                 label_space=labels, gold="cs.NI", target_noun="essay"),
    TaskInstance(id="wrong", kind="node_classification", dataset="toy", graph=graph, targets=[4],
                 label_space=labels, gold="cs.IT", target_noun="essay"),
    TaskInstance(id="isolated", kind="node_classification", dataset="toy", graph=graph, targets=[6],
                 label_space=labels, gold="cs.LG", target_noun="essay"),
]

TRACE = """First, node0 is described as work on network coding and relays.
Second, its neighbours node1 and node2 cover relaying and coding over noisy channels.
Wait, coding theory could also point to information theory, however the relaying theme is stronger.
Therefore node0 sits best with the networking papers.

Answer: cs.NI
Brief_reasoning: node0 and its neighbours are about relay networks."""

client = MockChatClient(lambda prompt: TRACE)
out = Path(tempfile.mkdtemp()) / "corpus.jsonl"
stats = build_corpus(queries, CurationConfig(keep_rejected=True), client, out)

for line in out.read_text().splitlines():
    rec = json.loads(line)
    print(rec["id"], rec["filter_verdicts"], "accepted" if rec["accepted"] else "rejected")
print(json.dumps(stats.to_dict(), indent=2))
