import random

import pytest

from graphreason import TaskInstance, TaskKind, TextGraph
from graphreason.graph import Edge

SECTION_ORDER = ("structure", "semantic", "comprehensive", "rethink")


def path_graph(n, directed=False):
    nodes = [(i, f"text of node {i}") for i in range(n)]
    edges = [Edge(i, i + 1) for i in range(n - 1)]
    return TextGraph(tuple(nodes), tuple(edges), directed)


def random_graph(rng: random.Random, max_nodes=15, p=None):
    n = rng.randint(1, max_nodes)
    ids = rng.sample(range(100), n)
    p = rng.random() if p is None else p
    edges = [Edge(u, v) for i, u in enumerate(ids) for v in ids[i + 1:] if rng.random() < p]
    return TextGraph(tuple((i, f"paper {i}") for i in ids), tuple(edges), rng.random() < 0.3)


def normal_reply(answer="cs.NI", target="node0"):
    return (
        f"Okay, let me work out which category fits {target}.\n"
        f"First, the description of {target} talks about lattice codes for relay networks.\n"
        f"Second, its neighbours in the connection list are also about network coding.\n"
        "Wait, one neighbour is about information theory, but that is a minority.\n"
        f"Therefore the most plausible category for {target} is {answer}.\n\n"
        f"Answer: {answer}\n"
        f"Brief_reasoning: {target} focuses on practical network coding for relays.\n"
    )


def rethink_reply(sections: dict, answer="cs.NI", brief="short summary", final="final thoughts"):
    body = "".join(f"<{t}>{sections[t]}</{t}>\n" for t in SECTION_ORDER)
    return f"<think>\n{body}{final}\n</think>\nAnswer: {answer}\nBrief_reasoning: {brief}\n"


@pytest.fixture
def cora_like():
    """A small citation graph: node 3 is the target with neighbours 4 and 5."""
    texts = {
        1: "Graph neural networks for node classification",
        2: "Optimal channel sensing in cognitive radio",
        3: "Practical lattice codes for physical layer network coding",
        4: "Compute and forward relaying",
        5: "Network coding over noisy channels",
        6: "Isolated paper about compilers",
    }
    edges = [Edge(3, 4), Edge(3, 5), Edge(4, 5), Edge(1, 2), Edge(2, 4)]
    return TextGraph(tuple(texts.items()), tuple(edges))


@pytest.fixture
def node_instance(cora_like):
    return TaskInstance(
        id="q1", kind=TaskKind.NODE_CLASSIFICATION, dataset="cora", graph=cora_like,
        targets=[3], label_space=["cs.NI", "cs.IT", "cs.LG"], gold="cs.NI", target_noun="essay",
    )


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): a top-level acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _ACCEPTANCE[name] = status


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{status}  {name}")
