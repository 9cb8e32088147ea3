"""Parse model replies into structured fields.

Parsing never raises: malformed replies come back with ``format_valid``
set to False and whatever fields could be recovered.
"""
from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from typing import Optional

from .prompts import TaskKind, Variant

SECTION_TAGS = ("structure", "semantic", "comprehensive", "rethink")

_KEY = r"^[ \t>*_#-]*{name}[*_]*[ \t]*:[*_]*[ \t]*"
_ANSWER = re.compile(_KEY.format(name="answer") + r"(.*)$", re.IGNORECASE | re.MULTILINE)
_BRIEF = re.compile(_KEY.format(name="brief[_ ]reasoning"), re.IGNORECASE | re.MULTILINE)
_BOND = re.compile(_KEY.format(name="bond[_ ]value") + r"(.*)$", re.IGNORECASE | re.MULTILINE)
_ANY_KEY = re.compile(
    _KEY.format(name="(?:answer|brief[_ ]reasoning|bond[_ ]value)"), re.IGNORECASE | re.MULTILINE
)
_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_EDGE_PUNCT = " \t\r\n.,;:!?\"'`*_()[]{}<>‘’“”"


@dataclass
class ParsedResponse:
    raw: str = ""
    think_present: bool = False
    sections: dict = field(default_factory=lambda: {t: None for t in SECTION_TAGS})
    answer: Optional[str] = None
    brief_reasoning: Optional[str] = None
    bond_value: Optional[float] = None
    bond_clamped: bool = False
    format_valid: bool = False
    variant: Variant = Variant.NORMAL
    kind: TaskKind = TaskKind.NODE_CLASSIFICATION
    # (start, end) character spans, used for the nesting check
    spans: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("spans")
        d["variant"] = self.variant.value
        d["kind"] = self.kind.value
        return d


def _tag_span(text: str, tag: str):
    """Content span of the first ``<tag>`` and the first ``</tag>`` after it."""
    start = text.find(f"<{tag}>")
    if start < 0:
        return None
    start += len(tag) + 2
    end = text.find(f"</{tag}>", start)
    if end < 0:
        return None
    return start, end


def trim_token(s: str) -> str:
    return s.strip(_EDGE_PUNCT)


def yes_no_tokens(answer: str) -> Optional[list[str]]:
    """Normalise a Yes/No sequence; None if any token is neither."""
    out = []
    for tok in answer.split():
        tok = trim_token(tok).lower()
        if tok == "yes":
            out.append("Yes")
        elif tok == "no":
            out.append("No")
        elif tok:
            return None
    return out or None


def parse_number(answer: Optional[str]) -> Optional[float]:
    if not answer:
        return None
    m = _NUMBER.search(answer.replace("−", "-"))
    if m is None:
        return None
    try:
        return float(m.group())
    except ValueError:
        return None


def answer_wellformed(answer: str, kind: TaskKind) -> bool:
    if kind is TaskKind.GRAPH_CLASSIFICATION:
        return yes_no_tokens(answer) is not None
    if kind is TaskKind.GRAPH_REGRESSION:
        return parse_number(answer) is not None
    return bool(trim_token(answer))


def parse_response(text, variant=Variant.NORMAL, kind=TaskKind.NODE_CLASSIFICATION) -> ParsedResponse:
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    elif not isinstance(text, str):
        text = "" if text is None else str(text)
    variant, kind = Variant.parse(variant), TaskKind.parse(kind)
    p = ParsedResponse(raw=text, variant=variant, kind=kind)

    think = _tag_span(text, "think")
    if think is not None:
        p.think_present = True
        p.spans["think"] = think
    for tag in SECTION_TAGS:
        span = _tag_span(text, tag)
        if span is not None:
            p.sections[tag] = text[span[0]:span[1]]
            p.spans[tag] = span

    answers = list(_ANSWER.finditer(text))
    if answers:
        value = answers[-1].group(1).strip()
        p.answer = value or None
        p.spans["answer"] = answers[-1].start()

    briefs = list(_BRIEF.finditer(text))
    if briefs:
        start = briefs[-1].end()
        nxt = _ANY_KEY.search(text, start)
        body = text[start:nxt.start() if nxt else len(text)].strip()
        p.brief_reasoning = body or None

    if kind is TaskKind.LINK_PREDICTION:
        bonds = list(_BOND.finditer(text))
        if bonds:
            value = parse_number(bonds[-1].group(1))
            if value is not None:
                p.bond_clamped = not 0.0 <= value <= 1.0
                p.bond_value = min(max(value, 0.0), 1.0)

    p.format_valid = check_format(p, variant)
    return p


def check_format(p: ParsedResponse, variant=Variant.NORMAL) -> bool:
    variant = Variant.parse(variant)
    if p.answer is None or not answer_wellformed(p.answer, p.kind):
        return False
    if variant is Variant.NORMAL:
        return p.brief_reasoning is not None
    think = p.spans.get("think")
    if think is None:
        return False
    for tag in SECTION_TAGS:
        content, span = p.sections.get(tag), p.spans.get(tag)
        if content is None or not content.strip() or span is None:
            return False
        # span covers the content; the tags themselves sit just outside it
        if span[0] - len(tag) - 2 < think[0] or span[1] + len(tag) + 3 > think[1]:
            return False
    return True


def label_pattern(label: str) -> re.Pattern:
    """Whole-token, case-insensitive matcher for one label.

    '.' and '-' count as token characters when followed by a word character,
    so ``NI`` does not match inside ``cs.NI`` but ``cs.NI.`` still matches.
    """
    body = r"\s+".join(re.escape(w) for w in label.split())
    return re.compile(rf"(?<![\w.\-]){body}(?![\w]|[.\-]\w)", re.IGNORECASE)


def extract_candidates(p: ParsedResponse, label_space: list[str]) -> list[str]:
    text = "\n".join(p.sections.get(t) or "" for t in ("comprehensive", "rethink"))
    if not text.strip():
        return []
    found = []
    for label in dict.fromkeys(label_space):
        if label.strip() and label_pattern(label).search(text):
            found.append(label)
    return found
