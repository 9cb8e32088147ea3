"""GRPO objective math over externally supplied log-probabilities.

Log-probabilities are per-response sums over tokens, in nats. Nothing here
computes gradients; the functions evaluate the objective so trainers'
numbers can be checked.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import InputError, StateError

DEFAULT_EPSILON = 0.2
DEFAULT_BETA = 0.04
GROUP_SIZE = 5
ZERO_STD = 1e-12


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """``(r - mean) / std`` with the population std; all zeros if std ~ 0."""
    rewards = [float(r) for r in rewards]
    g = len(rewards)
    if g < 2:
        raise InputError(f"need at least 2 rewards per group, got {g}")
    mean = math.fsum(rewards) / g
    std = math.sqrt(math.fsum((r - mean) ** 2 for r in rewards) / g)
    if std < ZERO_STD:
        return [0.0] * g
    return [(r - mean) / std for r in rewards]


def importance_ratio(logp_new: float, logp_old: float) -> float:
    return math.exp(logp_new - logp_old)


def kl_estimate(logp_ref: float, logp_new: float) -> float:
    """``u - log(u) - 1`` with ``u = pi_ref / pi_theta``.

    Written as ``expm1(d) - d`` to stay accurate (and non-negative) near d = 0.
    """
    d = logp_ref - logp_new
    try:
        return max(math.expm1(d) - d, 0.0)
    except OverflowError:
        return math.inf


def clipped_term(ratio: float, advantage: float, epsilon: float) -> float:
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    return min(ratio * advantage, clipped * advantage)


@dataclass(frozen=True)
class ScoredResponse:
    reward: float
    logp_new: float
    logp_old: float
    logp_ref: float
    answer: Optional[str] = None
    gold: Optional[str] = None
    variant: str = "rethink"
    parsed: object = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class GroupSample:
    query_id: str
    responses: tuple[ScoredResponse, ...]
    advantages: Optional[tuple[float, ...]] = None

    @property
    def g(self) -> int:
        return len(self.responses)

    def with_advantages(self) -> "GroupSample":
        adv = group_advantages([r.reward for r in self.responses])
        return replace(self, advantages=tuple(adv))


def per_response_terms(group: GroupSample, epsilon=DEFAULT_EPSILON, beta=DEFAULT_BETA) -> list[float]:
    if group.advantages is None:
        raise StateError(f"group {group.query_id!r}: advantages not computed")
    if len(group.advantages) != group.g:
        raise StateError(f"group {group.query_id!r}: advantage count does not match group size")
    if not 0.0 < epsilon < 1.0:
        raise InputError(f"epsilon must lie in (0, 1), got {epsilon}")
    if beta < 0:
        raise InputError(f"beta must be non-negative, got {beta}")
    terms = []
    for resp, adv in zip(group.responses, group.advantages):
        ratio = importance_ratio(resp.logp_new, resp.logp_old)
        kl = kl_estimate(resp.logp_ref, resp.logp_new)
        # beta * KL is skipped at beta = 0 so an infinite KL cannot produce nan
        penalty = beta * kl if beta else 0.0
        terms.append(clipped_term(ratio, adv, epsilon) - penalty)
    return terms


def grpo_objective(group: GroupSample, epsilon=DEFAULT_EPSILON, beta=DEFAULT_BETA) -> float:
    terms = per_response_terms(group, epsilon, beta)
    return math.fsum(terms) / len(terms)


def sft_loss(logp_targets: Sequence[float]) -> float:
    """Mean negative log-likelihood of the (reasoning, answer) targets."""
    if len(logp_targets) == 0:
        raise InputError("sft_loss needs at least one example")
    return -math.fsum(logp_targets) / len(logp_targets)


# --- score files -----------------------------------------------------------

SCORE_FIELDS = ("query_id", "variant", "reward", "logp_new", "logp_old", "logp_ref", "answer", "gold")


def score_record(query_id: str, resp: ScoredResponse) -> dict:
    return {
        "query_id": query_id,
        "variant": resp.variant,
        "reward": resp.reward,
        "logp_new": resp.logp_new,
        "logp_old": resp.logp_old,
        "logp_ref": resp.logp_ref,
        "answer": resp.answer,
        "gold": resp.gold,
    }


def write_score_file(path, groups: Iterable[GroupSample]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for group in groups:
            for resp in group.responses:
                fh.write(json.dumps(score_record(group.query_id, resp)) + "\n")


def read_score_file(path) -> list[GroupSample]:
    """Group score records by ``query_id``, keeping first-seen order."""
    groups: dict[str, list[ScoredResponse]] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read score file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            resp = ScoredResponse(
                reward=float(rec["reward"]),
                logp_new=float(rec["logp_new"]),
                logp_old=float(rec["logp_old"]),
                logp_ref=float(rec["logp_ref"]),
                answer=rec.get("answer"),
                gold=rec.get("gold"),
                variant=rec.get("variant", "rethink"),
            )
            qid = str(rec["query_id"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}:{lineno}: bad score record ({exc})") from exc
        for name in ("logp_new", "logp_old", "logp_ref"):
            if not math.isfinite(getattr(resp, name)):
                raise InputError(f"{path}:{lineno}: {name} is not finite")
        groups.setdefault(qid, []).append(resp)
    return [GroupSample(qid, tuple(rs)) for qid, rs in groups.items()]
