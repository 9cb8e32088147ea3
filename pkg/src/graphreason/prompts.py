"""Task instances and prompt composition."""
from __future__ import annotations

import enum
import json
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional

from .errors import InputError
from .graph import Subgraph, TextGraph, extract_khop, load_graph, whole_graph
from .linearize import LinearizedGraph


class TaskKind(str, enum.Enum):
    NODE_CLASSIFICATION = "node_classification"
    LINK_CLASSIFICATION = "link_classification"
    LINK_PREDICTION = "link_prediction"
    GRAPH_CLASSIFICATION = "graph_classification"
    GRAPH_REGRESSION = "graph_regression"

    @classmethod
    def parse(cls, value) -> "TaskKind":
        if isinstance(value, cls):
            return value
        key = re.sub(r"(?<!^)(?=[A-Z])", "_", str(value)).replace("-", "_").lower()
        try:
            return cls(key)
        except ValueError:
            raise InputError(f"unknown task kind {value!r}") from None

    @property
    def is_graph_level(self) -> bool:
        return self in (TaskKind.GRAPH_CLASSIFICATION, TaskKind.GRAPH_REGRESSION)

    @property
    def is_classification(self) -> bool:
        return self is not TaskKind.GRAPH_REGRESSION


class Variant(str, enum.Enum):
    NORMAL = "normal"
    RETHINK = "rethink"

    @classmethod
    def parse(cls, value) -> "Variant":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown template variant {value!r}") from None


_TARGET_COUNT = {
    TaskKind.NODE_CLASSIFICATION: 1,
    TaskKind.LINK_CLASSIFICATION: 2,
    TaskKind.LINK_PREDICTION: 2,
}


def link_prediction_choices(relation: str) -> list[str]:
    return [
        f"Yes, they have {relation} relationships",
        f"No, they do not have {relation} relationships",
    ]


@dataclass
class TaskInstance:
    id: str
    kind: TaskKind
    dataset: str
    graph: TextGraph = field(repr=False)
    targets: list[int] = field(default_factory=list)
    label_space: list[str] = field(default_factory=list)
    gold: str = ""
    target_noun: str = ""
    extras: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = TaskKind.parse(self.kind)
        self.targets = [int(t) for t in self.targets]
        self.gold = str(self.gold)
        need = _TARGET_COUNT.get(self.kind)
        if need is not None and len(self.targets) != need:
            raise InputError(
                f"instance {self.id}: {self.kind.value} needs {need} target(s), got {len(self.targets)}"
            )
        if self.kind is TaskKind.LINK_PREDICTION:
            if "relation" not in self.extras:
                raise InputError(f"instance {self.id}: link prediction needs extras['relation']")
            choices = link_prediction_choices(self.extras["relation"])
            if not self.label_space:
                self.label_space = choices
            polarity = self.gold.strip().lower().rstrip(".")
            if polarity in ("yes", "no"):
                self.gold = choices[0] if polarity == "yes" else choices[1]
        if self.kind.is_classification and self.kind is not TaskKind.GRAPH_CLASSIFICATION:
            if self.gold not in self.label_space:
                raise InputError(f"instance {self.id}: gold {self.gold!r} not in label space")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None, cache: dict | None = None):
        graph = data.get("graph")
        if isinstance(graph, str):
            path = Path(graph)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            if cache is not None and path in cache:
                graph = cache[path]
            else:
                graph = load_graph(path)
                if cache is not None:
                    cache[path] = graph
        elif isinstance(graph, dict):
            graph = TextGraph.from_dict(graph)
        else:
            raise InputError(f"instance {data.get('id')!r}: missing graph")
        try:
            return cls(
                id=str(data["id"]),
                kind=data["kind"],
                dataset=str(data.get("dataset", "")),
                graph=graph,
                targets=list(data.get("targets", [])),
                label_space=[str(x) for x in data.get("label_space", [])],
                gold=data["gold"],
                target_noun=str(data.get("target_noun", "")),
                extras={str(k): str(v) for k, v in data.get("extras", {}).items()},
            )
        except KeyError as exc:
            raise InputError(f"instance record missing field {exc}") from exc

    def subgraph(self, hops: int = 1) -> Subgraph:
        if self.kind.is_graph_level:
            return whole_graph(self.graph)
        return extract_khop(self.graph, self.targets, hops)


def iter_instances(path, errors: Optional[list] = None) -> Iterator[TaskInstance]:
    """Yield instances from a JSONL file.

    Graph references are resolved relative to the instances file. If
    ``errors`` is a list, bad records are appended to it and skipped;
    otherwise they raise.
    """
    path = Path(path)
    cache: dict = {}
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read instances file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield TaskInstance.from_dict(json.loads(line), path.parent, cache)
            except (json.JSONDecodeError, InputError) as exc:
                if errors is None:
                    raise InputError(f"{path}:{lineno}: {exc}") from exc
                errors.append((lineno, str(exc)))


@dataclass(frozen=True)
class PromptBundle:
    prefix: str
    question: str
    instruction: str
    variant: Variant
    candidate_count: int = 3

    @property
    def full_text(self) -> str:
        return self.prefix + self.question + self.instruction


TEMPLATE_SECTIONS = ("prefix", "question", "instruction")
PLACEHOLDERS = (
    "target", "node_id", "node_id_a", "node_id_b", "node_description", "connection",
    "labels", "sample_answer", "candidate", "bioassays", "relation", "description",
)


@lru_cache(maxsize=None)
def load_template(kind: TaskKind, variant: Variant) -> dict[str, str]:
    name = f"{TaskKind.parse(kind).value}.{Variant.parse(variant).value}.txt"
    raw = resources.files("graphreason.templates").joinpath(name).read_text("utf-8")
    parts = re.split(r"^=== (\w+) ===\n", raw, flags=re.MULTILINE)
    sections = dict(zip(parts[1::2], parts[2::2]))
    if tuple(sections) != TEMPLATE_SECTIONS:
        raise RuntimeError(f"template {name} is malformed")
    return sections


def sample_answer(kind: TaskKind, labels: list[str], gold: str = "") -> str:
    if kind is TaskKind.GRAPH_REGRESSION:
        return "1.23"
    if kind is TaskKind.GRAPH_CLASSIFICATION:
        n = max(len(gold.split()), 1)
        return " ".join(["Yes", "No"][i % 2] for i in range(n))
    return labels[0] if labels else ""


def build_prompt(
    inst: TaskInstance,
    lin: LinearizedGraph,
    variant=Variant.NORMAL,
    candidate_count: int = 3,
    labels: Optional[list[str]] = None,
) -> PromptBundle:
    """Fill the (kind, variant) template for one instance.

    ``labels`` overrides the instance label space, e.g. with a k-way subset.
    """
    variant = Variant.parse(variant)
    kind = inst.kind
    if variant is Variant.RETHINK and kind.is_classification and candidate_count < 2:
        raise InputError("rethink prompts need candidate_count >= 2")
    labels = list(inst.label_space if labels is None else labels)
    values = {
        "target": inst.target_noun,
        "node_description": lin.node_block,
        "connection": lin.edge_block,
        "labels": ", ".join(labels),
        "sample_answer": sample_answer(kind, labels, inst.gold),
        "candidate": str(candidate_count),
    }
    local = lin.local_id_of
    if kind is TaskKind.NODE_CLASSIFICATION:
        values["node_id"] = str(local[inst.targets[0]])
    elif kind in (TaskKind.LINK_CLASSIFICATION, TaskKind.LINK_PREDICTION):
        values["node_id_a"] = str(local[inst.targets[0]])
        values["node_id_b"] = str(local[inst.targets[1]])
    required = {
        TaskKind.GRAPH_CLASSIFICATION: ("bioassays",),
        TaskKind.GRAPH_REGRESSION: ("description",),
        TaskKind.LINK_PREDICTION: ("relation",),
    }.get(kind, ())
    for key in required:
        if not inst.extras.get(key):
            raise InputError(f"instance {inst.id}: {kind.value} prompt needs extras[{key!r}]")
        values[key] = inst.extras[key]

    template = load_template(kind, variant)
    filled = {name: template[name].format_map(values) for name in TEMPLATE_SECTIONS}
    return PromptBundle(variant=variant, candidate_count=candidate_count, **filled)


def sample_label_subset(full_labels: list[str], k: int, gold: str, seed: int) -> list[str]:
    """Pick ``k`` labels including ``gold``; the rest uniformly, then shuffle."""
    labels = list(dict.fromkeys(full_labels))
    if gold not in labels:
        raise InputError(f"gold label {gold!r} not in label space")
    if not 2 <= k <= len(labels):
        raise InputError(f"k must be in [2, {len(labels)}], got {k}")
    rng = random.Random(seed)
    chosen = [gold] + rng.sample([x for x in labels if x != gold], k - 1)
    rng.shuffle(chosen)
    return chosen
