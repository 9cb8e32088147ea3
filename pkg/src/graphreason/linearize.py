"""Render subgraphs as node-description and connection blocks."""
from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

from .errors import CurationError
from .graph import Subgraph

log = logging.getLogger(__name__)

EDGE_PATTERN = re.compile(r"node(\d+)-node(\d+)")
_NODE_PREFIX = re.compile(r"^\s*node\w*\s*:\s*", re.IGNORECASE)


@dataclass(frozen=True)
class LinearizedGraph:
    node_block: str
    edge_block: str
    local_id_of: dict


def _one_line(text: str) -> str:
    return re.sub(r"\s*[\r\n]+\s*", " ", text).strip()


def describe_nodes(sub: Subgraph, texts: dict | None = None) -> str:
    """One ``node<k>: <text>`` line per member, in local-index order.

    ``texts`` optionally overrides node texts (e.g. with summaries).
    """
    texts = texts or {}
    by_local = sorted(sub.local_id_of.items(), key=lambda kv: kv[1])
    lines = []
    for node, k in by_local:
        text = texts.get(node, sub.parent.text_of[node])
        lines.append(f"node{k}: {_one_line(text)}")
    return "\n".join(lines)


def describe_edges(sub: Subgraph, include_text: bool = False) -> str:
    local = sub.local_id_of
    pairs: dict[tuple[int, int], str | None] = {}
    for e in sub.induced_edges:
        a, b = sorted((local[e.src], local[e.dst]))
        # directed u->v and v->u collapse to one undirected pair
        if (a, b) not in pairs or pairs[(a, b)] is None:
            pairs[(a, b)] = e.text
    parts = []
    for (a, b), text in sorted(pairs.items()):
        item = f"node{a}-node{b}"
        if include_text and text:
            item += f" ({_one_line(text)})"
        parts.append(item)
    return ", ".join(parts)


def parse_edge_block(block: str) -> set[tuple[int, int]]:
    return {(int(a), int(b)) for a, b in EDGE_PATTERN.findall(block)}


def summary_prompt(text: str) -> str:
    template = resources.files("graphreason.templates").joinpath("summary.txt").read_text("utf-8")
    return template.replace("{node_descriptions}", text.strip())


def _clean_summary(reply: str) -> str:
    return _NODE_PREFIX.sub("", _one_line(reply))


def summarize_node(text: str, client, max_words: int = 25) -> str:
    """Ask the model for a short summary of one node's text.

    An over-long summary is requested once more and then cut to ``max_words``.
    """
    if not text.strip():
        raise CurationError("cannot summarize empty node text")
    prompt = summary_prompt(text)
    summary = ""
    for attempt in range(2):
        summary = _clean_summary(client.chat_complete(prompt))
        if not summary:
            raise CurationError("model returned an empty summary")
        if len(summary.split()) <= max_words:
            return summary
        log.debug("summary has %d words (attempt %d)", len(summary.split()), attempt + 1)
    return " ".join(summary.split()[:max_words])


def linearize(
    sub: Subgraph,
    client=None,
    summarize_over: int = 60,
    include_edge_text: bool = False,
    max_workers: int = 4,
) -> LinearizedGraph:
    """Build both blocks; with a client, node texts longer than
    ``summarize_over`` words are replaced by model summaries."""
    texts = {}
    if client is not None:
        long_nodes = [
            n for n in sorted(sub.members)
            if len(sub.parent.text_of[n].split()) > summarize_over
        ]
        if long_nodes:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                summaries = pool.map(
                    lambda n: summarize_node(sub.parent.text_of[n], client), long_nodes
                )
                texts = dict(zip(long_nodes, summaries))
    return LinearizedGraph(
        node_block=describe_nodes(sub, texts),
        edge_block=describe_edges(sub, include_edge_text),
        local_id_of=dict(sub.local_id_of),
    )
