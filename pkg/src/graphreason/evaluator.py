"""Zero-shot evaluation: accuracy for classification kinds, MAE for regression."""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import GraphReasonError, InputError, TransportError
from .linearize import linearize
from .parsing import answer_wellformed, parse_number, parse_response
from .prompts import TaskInstance, TaskKind, Variant, build_prompt, sample_label_subset
from .rewards import match_answer

log = logging.getLogger(__name__)

CORRECT, INCORRECT = "correct", "incorrect"
PARSE_FAILURE, TRANSPORT_ERROR = "parse_failure", "transport_error"


def score_classification(preds: Sequence[Optional[str]], golds: Sequence[str], kind=TaskKind.NODE_CLASSIFICATION) -> float:
    if len(preds) != len(golds):
        raise InputError(f"{len(preds)} predictions for {len(golds)} gold labels")
    if not golds:
        raise InputError("cannot score an empty set")
    hits = sum(1 for p, g in zip(preds, golds) if p and match_answer(p, g, kind))
    return hits / len(golds)


def score_regression(preds: Sequence[float], golds: Sequence[float]) -> float:
    if len(preds) != len(golds):
        raise InputError(f"{len(preds)} predictions for {len(golds)} targets")
    if not golds:
        raise InputError("cannot score an empty set")
    return math.fsum(abs(float(p) - float(g)) for p, g in zip(preds, golds)) / len(golds)


@dataclass
class EvalRow:
    id: str
    predicted: Optional[Union[str, float]]
    gold: Union[str, float]
    status: str
    error: Optional[float] = None


@dataclass
class EvalReport:
    dataset: str
    kind: TaskKind
    way: Optional[int]
    n: int
    metric_name: str
    metric_value: float
    per_instance: list[EvalRow] = field(default_factory=list)
    excluded: int = 0
    hard_errors: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["kind"] = TaskKind.parse(d["kind"])
        d["per_instance"] = [EvalRow(**r) for r in d.get("per_instance", [])]
        return cls(**d)


@dataclass
class EvalConfig:
    variant: Variant = Variant.NORMAL
    k_way: Optional[int] = None
    seed: int = 0
    hops: int = 1
    candidate_count: int = 3
    # "exclude" drops unparseable regression answers from the MAE;
    # a number is used as their absolute error instead
    regression_penalty: Union[str, float] = "exclude"
    max_concurrency: int = 8


def _evaluate_one(index: int, inst: TaskInstance, cfg: EvalConfig, client) -> EvalRow:
    variant = Variant.parse(cfg.variant)
    labels = None
    if cfg.k_way and inst.kind.is_classification and inst.label_space:
        labels = sample_label_subset(inst.label_space, cfg.k_way, inst.gold, cfg.seed + index)
    lin = linearize(inst.subgraph(cfg.hops))
    bundle = build_prompt(inst, lin, variant, cfg.candidate_count, labels)
    try:
        reply = client.chat_complete(bundle.full_text)
    except TransportError as exc:
        log.warning("instance %s: %s", inst.id, exc)
        return EvalRow(inst.id, None, inst.gold, TRANSPORT_ERROR)
    parsed = parse_response(reply, variant, inst.kind)

    if inst.kind is TaskKind.GRAPH_REGRESSION:
        gold = float(inst.gold)
        value = parse_number(parsed.answer)
        if value is None:
            return EvalRow(inst.id, None, gold, PARSE_FAILURE)
        value = round(value, 2)
        return EvalRow(inst.id, value, gold, "ok", abs(value - gold))

    if parsed.answer is None or not answer_wellformed(parsed.answer, inst.kind):
        return EvalRow(inst.id, parsed.answer, inst.gold, PARSE_FAILURE)
    ok = match_answer(parsed.answer, inst.gold, inst.kind)
    return EvalRow(inst.id, parsed.answer, inst.gold, CORRECT if ok else INCORRECT)


def eval_run(instances: Sequence[TaskInstance], cfg: EvalConfig, client) -> EvalReport:
    """Evaluate one homogeneous (dataset, kind) batch of instances.

    Per-instance failures are recorded as rows and never abort the run.
    """
    instances = list(instances)
    if not instances:
        raise InputError("no instances to evaluate")
    keys = {(i.dataset, i.kind) for i in instances}
    if len(keys) != 1:
        raise InputError(f"instances mix datasets/kinds: {sorted((d, k.value) for d, k in keys)}")
    dataset, kind = keys.pop()

    def run(args):
        idx, inst = args
        try:
            return _evaluate_one(idx, inst, cfg, client)
        except GraphReasonError as exc:
            log.warning("instance %s: %s", inst.id, exc)
            return EvalRow(inst.id, None, inst.gold, TRANSPORT_ERROR)

    with ThreadPoolExecutor(cfg.max_concurrency) as pool:
        rows = list(pool.map(run, enumerate(instances)))

    hard = sum(r.status == TRANSPORT_ERROR for r in rows)
    if kind is TaskKind.GRAPH_REGRESSION:
        errors = [r.error for r in rows if r.error is not None]
        missing = len(rows) - len(errors)
        if cfg.regression_penalty == "exclude":
            excluded = missing
        else:
            errors += [float(cfg.regression_penalty)] * missing
            excluded = 0
        value = math.fsum(errors) / len(errors) if errors else math.nan
        return EvalReport(dataset, kind, None, len(rows), "mae", value, rows, excluded, hard)

    correct = sum(r.status == CORRECT for r in rows)
    way = cfg.k_way if cfg.k_way else (len(instances[0].label_space) or None)
    return EvalReport(dataset, kind, way, len(rows), "accuracy", correct / len(rows), rows, 0, hard)


def group_instances(instances):
    """Split instances into (dataset, kind) batches, keeping first-seen order."""
    groups: dict = {}
    for inst in instances:
        groups.setdefault((inst.dataset, inst.kind), []).append(inst)
    return list(groups.values())


def write_reports(reports, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")


def read_reports(path) -> list[EvalReport]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [EvalReport.from_dict(json.loads(l)) for l in lines if l.strip()]


def render_table(reports) -> str:
    header = ("dataset", "task", "way", "n", "metric", "value")
    rows = []
    for r in reports:
        if r.metric_name == "accuracy":
            value = f"{100 * r.metric_value:.2f}%"
        else:
            value = f"{r.metric_value:.2f}"
            if r.excluded:
                value += f" ({r.excluded} excluded)"
        rows.append((r.dataset, r.kind.value, str(r.way or "-"), str(r.n), r.metric_name, value))
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row) for row in rows]
    return "\n".join(lines)
