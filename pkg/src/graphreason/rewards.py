"""Rule-based rewards for the normal and rethink templates."""
from __future__ import annotations

from typing import Optional

from .parsing import ParsedResponse, check_format, extract_candidates, parse_number, trim_token, yes_no_tokens
from .prompts import TaskKind, Variant

CORRECT = 1.0
CANDIDATE_CREDIT = 0.3
FORMAT_ONLY = 0.01
NOTHING = 0.0


def normalize_label(s: str) -> str:
    return " ".join(trim_token(s).lower().split())


def _polarity(s: str) -> Optional[str]:
    words = normalize_label(s).replace(",", " ").split()
    return words[0] if words and words[0] in ("yes", "no") else None


def match_answer(answer: Optional[str], gold: str, kind=TaskKind.NODE_CLASSIFICATION) -> bool:
    """Compare a model answer to the gold label under the rules of ``kind``."""
    if not answer or not gold:
        return False
    kind = TaskKind.parse(kind)
    if kind is TaskKind.GRAPH_CLASSIFICATION:
        got, want = yes_no_tokens(answer), yes_no_tokens(gold)
        return got is not None and got == want
    if kind is TaskKind.GRAPH_REGRESSION:
        got, want = parse_number(answer), parse_number(gold)
        return got is not None and want is not None and round(got, 2) == round(want, 2)
    if normalize_label(answer) == normalize_label(gold):
        return True
    if kind is TaskKind.LINK_PREDICTION:
        # the choice is binary; a bare "Yes"/"No" names it unambiguously
        pol = _polarity(answer)
        return pol is not None and pol == _polarity(gold)
    return False


def reward_normal(p: ParsedResponse, gold: str, kind=None) -> float:
    kind = p.kind if kind is None else TaskKind.parse(kind)
    if p.answer is not None and match_answer(p.answer, gold, kind):
        return CORRECT
    if check_format(p, Variant.NORMAL):
        return FORMAT_ONLY
    return NOTHING


def reward_rethink(p: ParsedResponse, gold: str, label_space=None, kind=None) -> float:
    """Rethink reward: full credit, partial credit when the gold label shows up
    among the listed candidates, a format bonus, or nothing.

    Candidates are searched in both the <comprehensive> and <rethink> sections.
    For label-free kinds the gold string itself is the only candidate.
    """
    kind = p.kind if kind is None else TaskKind.parse(kind)
    if p.answer is not None and match_answer(p.answer, gold, kind):
        return CORRECT
    labels = list(label_space) if label_space else [gold]
    want = normalize_label(gold)
    if any(normalize_label(c) == want for c in extract_candidates(p, labels)):
        return CANDIDATE_CREDIT
    if check_format(p, Variant.RETHINK):
        return FORMAT_ONLY
    return NOTHING


def reward(p: ParsedResponse, gold: str, label_space=None, variant=None, kind=None) -> float:
    variant = p.variant if variant is None else Variant.parse(variant)
    if variant is Variant.RETHINK:
        return reward_rethink(p, gold, label_space, kind)
    return reward_normal(p, gold, kind)
