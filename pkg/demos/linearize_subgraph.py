"""
Turning a neighbourhood into text
=================================

Pull the 1-hop neighbourhood around a paper out of a small citation graph and
print the node and connection blocks that every prompt is built from.
"""
from pathlib import Path

from graphreason import extract_khop, linearize, load_graph

graph = load_graph(Path(__file__).parent / "data" / "citations.json")
print(f"{len(graph)} papers, {len(graph.edges)} citation links")

# paper 3 and everything one hop away; the target always becomes node0
sub = extract_khop(graph, targets=[3], h=1)
print("members:", sorted(sub.members), "local ids:", sub.local_id_of)

lin = linearize(sub)
print("\nNode description:")
print(lin.node_block)
print("Connection relationship among the nodes:")
print(lin.edge_block)

# two hops also reach paper 2, a citation of paper 4
print("\n2-hop members:", sorted(extract_khop(graph, [3], 2).members))
