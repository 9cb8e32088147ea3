"""Reasoning-corpus construction with three-stage quality filtering."""
from __future__ import annotations

import json
import logging
import re
from collections import Counter, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import CurationError, GraphReasonError, TransportError
from .graph import Subgraph, is_trivial
from .linearize import linearize
from .parsing import ParsedResponse, _ANSWER, parse_response
from .prompts import PromptBundle, TaskInstance, TaskKind, Variant, build_prompt
from .rewards import match_answer

log = logging.getLogger(__name__)

DEFAULT_MARKERS = ("first", "second", "therefore", "wait", "because", "however")
STAGES = ("sufficiency", "validity", "coherence")
RECORD_FIELDS = ("id", "dataset", "kind", "prompt", "reasoning", "answer", "gold", "filter_verdicts", "accepted")


@dataclass
class CurationConfig:
    hops: int = 1
    min_nodes: int = 2
    min_edges: int = 1
    min_words: int = 30
    max_words: int = 2000
    require_markers: bool = True
    markers: tuple[str, ...] = DEFAULT_MARKERS
    min_markers: int = 2
    blocklist: tuple[str, ...] = ()
    target_count: int = 10_000
    variant: Variant = Variant.NORMAL
    candidate_count: int = 3
    summarize: bool = False
    summarize_over: int = 60
    max_concurrency: int = 8
    keep_rejected: bool = False


@dataclass
class CurationRecord:
    id: str
    dataset: str
    kind: str
    prompt: str
    reasoning: str
    answer: Optional[str]
    gold: str
    filter_verdicts: dict
    accepted: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=False)


@dataclass
class CurationStats:
    total: int = 0
    unreadable: int = 0
    failed: int = 0
    accepted: int = 0
    # first stage that rejected each instance
    rejected_by_stage: Counter = field(default_factory=Counter)
    # every false verdict, including later stages of an already-rejected record
    verdict_failures: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "unreadable": self.unreadable,
            "failed": self.failed,
            "accepted": self.accepted,
            "rejected_by_stage": {s: self.rejected_by_stage.get(s, 0) for s in STAGES},
            "verdict_failures": {s: self.verdict_failures.get(s, 0) for s in STAGES},
        }


def split_reasoning(reply: str) -> str:
    """Everything before the final ``Answer:`` line (the whole reply if none)."""
    matches = list(_ANSWER.finditer(reply))
    if not matches:
        return reply.strip()
    return reply[: matches[-1].start()].strip()


def generate_trace(bundle: PromptBundle, client, kind=TaskKind.NODE_CLASSIFICATION):
    """Send one prompt and return ``(reasoning, parsed)``.

    An empty reply yields an empty reasoning string; callers treat that as a
    failed generation.
    """
    reply = client.chat_complete(bundle.full_text)
    parsed = parse_response(reply, bundle.variant, kind)
    return split_reasoning(reply), parsed


def filter_sufficiency(sub: Subgraph, cfg: CurationConfig) -> bool:
    return not is_trivial(sub, cfg.min_nodes, cfg.min_edges)


def filter_validity(parsed: ParsedResponse, gold: str, kind, blocklist: Iterable[str] = ()) -> bool:
    if not match_answer(parsed.answer, gold, kind):
        return False
    raw = parsed.raw.lower()
    return not any(term.lower() in raw for term in blocklist if term)


def filter_coherence(reasoning: str, sub: Subgraph, cfg: CurationConfig) -> bool:
    n_words = len(reasoning.split())
    if not cfg.min_words <= n_words <= cfg.max_words:
        return False
    target_ids = sorted({sub.local_id_of[t] for t in sub.targets})
    if not target_ids:
        return False
    mention = re.compile(r"\bnode\s?(?:%s)\b" % "|".join(map(str, target_ids)), re.IGNORECASE)
    if not mention.search(reasoning):
        return False
    if cfg.require_markers:
        lowered = reasoning.lower()
        hits = sum(1 for m in cfg.markers if re.search(rf"\b{re.escape(m.lower())}\b", lowered))
        if hits < cfg.min_markers:
            return False
    return True


def evaluate_filters(sub, parsed, reasoning, gold, kind, cfg) -> dict[str, bool]:
    """All three verdicts, computed independently (no short-circuit)."""
    return {
        "sufficiency": filter_sufficiency(sub, cfg),
        "validity": filter_validity(parsed, gold, kind, cfg.blocklist),
        "coherence": filter_coherence(reasoning, sub, cfg),
    }


def _process(inst: TaskInstance, cfg: CurationConfig, client):
    """Run one instance through the pipeline. Returns ``(record, failed)``."""
    sub = inst.subgraph(cfg.hops)
    if not filter_sufficiency(sub, cfg):
        verdicts = {"sufficiency": False, "validity": False, "coherence": False}
        return CurationRecord(inst.id, inst.dataset, inst.kind.value, "", "", None, inst.gold, verdicts, False), False
    lin = linearize(sub, client if cfg.summarize else None, cfg.summarize_over)
    bundle = build_prompt(inst, lin, cfg.variant, cfg.candidate_count)
    try:
        reasoning, parsed = generate_trace(bundle, client, inst.kind)
    except TransportError as exc:
        log.warning("instance %s: generation failed: %s", inst.id, exc)
        return None, True
    if not parsed.raw.strip():
        log.warning("instance %s: empty reply", inst.id)
        return None, True
    verdicts = evaluate_filters(sub, parsed, reasoning, inst.gold, inst.kind, cfg)
    record = CurationRecord(
        id=inst.id,
        dataset=inst.dataset,
        kind=inst.kind.value,
        prompt=bundle.full_text,
        reasoning=reasoning,
        answer=parsed.answer,
        gold=inst.gold,
        filter_verdicts=verdicts,
        accepted=all(verdicts.values()),
    )
    return record, False


def _safe_process(inst, cfg, client):
    try:
        return _process(inst, cfg, client)
    except (CurationError, GraphReasonError) as exc:
        log.warning("instance %s: %s", getattr(inst, "id", "?"), exc)
        return None, True


def build_corpus(instances: Iterable, cfg: CurationConfig, client, out_path, stats_path=None) -> CurationStats:
    """Curate instances into a JSONL corpus at ``out_path``.

    Generation runs on a thread pool; records are written in input order.
    Stops once ``cfg.target_count`` records are accepted. Items in
    ``instances`` that are exceptions (unreadable inputs) are counted and
    skipped.
    """
    stats = CurationStats()
    out_path = Path(out_path)
    window = 2 * cfg.max_concurrency
    pending: deque = deque()
    source = iter(instances)
    exhausted = False

    def refill(pool):
        nonlocal exhausted
        while not exhausted and len(pending) < window:
            try:
                inst = next(source)
            except StopIteration:
                exhausted = True
                return
            if isinstance(inst, Exception):
                pending.append(inst)
            else:
                pending.append(pool.submit(_safe_process, inst, cfg, client))

    with out_path.open("w", encoding="utf-8") as fh, ThreadPoolExecutor(cfg.max_concurrency) as pool:
        refill(pool)
        while pending and stats.accepted < cfg.target_count:
            item = pending.popleft()
            stats.total += 1
            if isinstance(item, Exception):
                log.warning("skipping unreadable instance: %s", item)
                stats.unreadable += 1
                refill(pool)
                continue
            record, failed = item.result()
            refill(pool)
            if failed:
                stats.failed += 1
                continue
            for stage in STAGES:
                if not record.filter_verdicts[stage]:
                    stats.verdict_failures[stage] += 1
            if record.accepted:
                stats.accepted += 1
            else:
                first = next(s for s in STAGES if not record.filter_verdicts[s])
                stats.rejected_by_stage[first] += 1
            if record.accepted or cfg.keep_rejected:
                fh.write(record.to_json() + "\n")
        for fut in pending:
            if not isinstance(fut, Exception):
                fut.cancel()

    if stats_path is not None:
        Path(stats_path).write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    return stats
