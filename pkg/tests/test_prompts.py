import json
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from graphreason import InputError, TaskInstance, TaskKind, TextGraph, Variant, build_prompt, linearize
from graphreason.graph import Edge
from graphreason.prompts import PLACEHOLDERS, iter_instances, sample_label_subset

MOLECULE = TextGraph(((0, "C"), (1, "O"), (2, "N")), (Edge(0, 1), Edge(1, 2)))
CITES = TextGraph(((0, "paper a"), (1, "paper b"), (2, "paper c")), (Edge(0, 2), Edge(1, 2)))


def make_instance(kind):
    kind = TaskKind.parse(kind)
    common = dict(id="i", dataset="d", kind=kind)
    if kind is TaskKind.NODE_CLASSIFICATION:
        return TaskInstance(graph=CITES, targets=[0], label_space=["cs.NI", "cs.IT"], gold="cs.IT",
                            target_noun="essay", **common)
    if kind is TaskKind.LINK_CLASSIFICATION:
        return TaskInstance(graph=CITES, targets=[0, 1], label_space=["born in", "works at"],
                            gold="born in", target_noun="entities", **common)
    if kind is TaskKind.LINK_PREDICTION:
        return TaskInstance(graph=CITES, targets=[0, 1], gold="Yes", target_noun="essays",
                            extras={"relation": "citation"}, **common)
    if kind is TaskKind.GRAPH_CLASSIFICATION:
        return TaskInstance(graph=MOLECULE, gold="Yes No No", extras={"bioassays": "assay 1; assay 2; assay 3"},
                            **common)
    return TaskInstance(graph=MOLECULE, gold="-1.25", target_noun="water solubility",
                        extras={"description": "log solubility in mols per litre"}, **common)


def render(kind, variant, **kw):
    inst = make_instance(kind)
    return build_prompt(inst, linearize(inst.subgraph(1)), variant, **kw)


ALL = [(k, v) for k in TaskKind for v in Variant]


@pytest.mark.parametrize("kind, variant", ALL)
def test_no_unexpanded_placeholders(kind, variant):
    text = render(kind, variant).full_text
    for name in PLACEHOLDERS:
        assert "{" + name + "}" not in text
    assert "{" not in text and "}" not in text


@pytest.mark.parametrize("kind, variant", ALL)
def test_full_text_is_concatenation(kind, variant):
    b = render(kind, variant)
    assert b.full_text == b.prefix + b.question + b.instruction
    assert b.full_text.index("Node description:") < b.full_text.index(b.question)


@pytest.mark.parametrize("kind", list(TaskKind))
def test_rethink_tag_order(kind):
    b = render(kind, Variant.RETHINK)
    firsts = [b.instruction.index(f"<{t}>") for t in ("think", "structure", "semantic", "comprehensive", "rethink")]
    assert firsts == sorted(firsts)
    for t in ("think", "structure", "semantic", "comprehensive", "rethink"):
        assert f"</{t}>" in b.instruction
    assert b.full_text.index("<think>") < b.full_text.rindex("</think>")


def test_node_classification_normal():
    text = render("node_classification", "normal").full_text
    assert "Select strictly from: cs.NI, cs.IT." in text
    assert "Brief_reasoning:" in text
    assert "(e.g., cs.NI)" in text
    assert "represented by node 0 " in text


def test_candidate_count_substituted():
    assert "provide 4 candidate answers" in render("node_classification", "rethink", candidate_count=4).full_text
    with pytest.raises(InputError):
        render("node_classification", "rethink", candidate_count=1)


@pytest.mark.parametrize("variant", list(Variant))
def test_link_prediction_anchor(variant):
    text = render("link_prediction", variant).full_text
    assert "set the threshold to 0.5" in text
    assert "Bond_value:" in text
    assert "‘Yes, they have citation relationships’" in text


@pytest.mark.parametrize("variant", list(Variant))
def test_regression_anchor(variant):
    text = render("graph_regression", variant).full_text
    assert "rounded to two decimal places" in text
    assert "falls within the range of -30 to 30" in text
    assert "Calculate the water solubility of this molecule." in text
    assert "e.g., 1.23" in text


def test_graph_classification_sample_answer():
    text = render("graph_classification", "normal").full_text
    assert "(e.g., Yes No Yes)" in text
    assert "Bioassays descriptions: assay 1; assay 2; assay 3" in text


def test_missing_extras_rejected():
    inst = make_instance("graph_classification")
    inst.extras = {}
    with pytest.raises(InputError, match="bioassays"):
        build_prompt(inst, linearize(inst.subgraph()), "normal")


def test_instance_validation():
    with pytest.raises(InputError):
        TaskInstance(id="x", kind="NodeClassification", dataset="d", graph=CITES, targets=[0, 1],
                     label_space=["a"], gold="a")
    with pytest.raises(InputError):
        TaskInstance(id="x", kind="node_classification", dataset="d", graph=CITES, targets=[0],
                     label_space=["a"], gold="b")
    inst = make_instance("link_prediction")
    assert inst.gold == "Yes, they have citation relationships"
    assert TaskKind.parse("GraphRegression") is TaskKind.GRAPH_REGRESSION


def test_sample_label_subset_examples():
    labels = ["a", "b", "c", "d"]
    assert sorted(sample_label_subset(labels, 4, "c", 1)) == labels
    assert sorted(sample_label_subset(["A", "B"], 2, "A", 9)) == ["A", "B"]
    assert sample_label_subset(labels, 3, "a", 5) == sample_label_subset(labels, 3, "a", 5)
    with pytest.raises(InputError):
        sample_label_subset(labels, 1, "a", 0)
    with pytest.raises(InputError):
        sample_label_subset(labels, 5, "a", 0)


@given(st.lists(st.text(min_size=1, max_size=5), min_size=2, max_size=12, unique=True), st.data())
def test_sample_label_subset_keeps_gold(labels, data):
    gold = data.draw(st.sampled_from(labels))
    k = data.draw(st.integers(2, len(labels)))
    out = sample_label_subset(labels, k, gold, data.draw(st.integers(0, 2**32)))
    assert gold in out and len(out) == k == len(set(out)) and set(out) <= set(labels)


def test_iter_instances(tmp_path):
    (tmp_path / "g.json").write_text(json.dumps(CITES.to_dict()))
    rec = {"id": "a", "kind": "node_classification", "dataset": "cora", "graph": "g.json",
           "targets": [0], "label_space": ["x", "y"], "gold": "x", "target_noun": "essay"}
    path = tmp_path / "inst.jsonl"
    path.write_text(json.dumps(rec) + "\nnot json\n" + json.dumps({**rec, "id": "b"}) + "\n")
    errors = []
    ids = [i.id for i in iter_instances(path, errors)]
    assert ids == ["a", "b"]
    assert errors and errors[0][0] == 2
    with pytest.raises(InputError):
        list(iter_instances(path))
