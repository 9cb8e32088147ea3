"""
Prompts in, structured answers out
==================================

Render the normal and rethink prompts for one node-classification query, then
parse a hand-written reply in each format.
"""
from pathlib import Path

from graphreason import TaskInstance, build_prompt, linearize, load_graph, parse_response

graph = load_graph(Path(__file__).parent / "data" / "citations.json")
query = TaskInstance(
    id="demo-1", kind="node_classification", dataset="toy", graph=graph, targets=[3],
    label_space=["cs.NI", "cs.IT", "cs.LG"], gold="cs.NI", target_noun="essay",
)
lin = linearize(query.subgraph(1))

normal = build_prompt(query, lin, "normal")
print(normal.full_text)
print("-" * 60)
rethink = build_prompt(query, lin, "rethink", candidate_count=2)
print(rethink.instruction)
print("-" * 60)

reply = """First, node0 is about lattice codes for network coding.
Second, node1 and node2 are about relaying over noisy channels.
Therefore node0 belongs with the networking papers.

Answer: cs.NI
Brief_reasoning: node0 and its neighbours study network coding for relays."""
parsed = parse_response(reply, "normal")
print("answer:", parsed.answer, "| format ok:", parsed.format_valid)

reply = """<think>
<structure>node0 is linked to node1 and node2, which also link to each other.</structure>
<semantic>The texts mix coding theory with relaying.</semantic>
<comprehensive>Candidates: cs.NI, cs.IT.</comprehensive>
<rethink>cs.IT fits the coding language, but the relaying focus favours cs.NI.</rethink>
</think>
Answer: cs.NI
Brief_reasoning: Relaying dominates."""
parsed = parse_response(reply, "rethink")
print("answer:", parsed.answer, "| format ok:", parsed.format_valid)
for tag, text in parsed.sections.items():
    print(f"  <{tag}> {text}")
