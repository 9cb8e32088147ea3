import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphreason import TaskKind, Variant, check_format, extract_candidates, parse_response

from conftest import SECTION_ORDER, normal_reply, rethink_reply

TAGS = ("think",) + SECTION_ORDER


def section_text():
    return st.text(min_size=1, max_size=80).filter(
        lambda s: s.strip() and not any(f"<{t}>" in s or f"</{t}>" in s for t in TAGS)
    )


def answer_text():
    return st.text(alphabet=st.characters(blacklist_categories=("Cc", "Cs", "Zl", "Zp")), min_size=1, max_size=20).filter(
        lambda s: s.strip() == s and s.strip(" .,;:!?\"'`*_()[]{}<>‘’“”")
    )


def test_normal_reply_answer():
    p = parse_response(normal_reply("cs.NI", "node3"))
    assert p.answer == "cs.NI"
    assert p.brief_reasoning.startswith("node3 focuses")
    assert p.format_valid


def test_empty_reply():
    p = parse_response("")
    assert p.answer is None and p.brief_reasoning is None and p.bond_value is None
    assert not p.think_present and all(v is None for v in p.sections.values())
    assert not p.format_valid


def test_brief_reasoning_on_following_line():
    p = parse_response("Answer: cs.NI\nBrief_reasoning:\n  spans\n  two lines\n")
    assert p.brief_reasoning == "spans\n  two lines"


def test_last_answer_wins():
    p = parse_response("Answer: cs.IT\nmore thoughts\nAnswer: cs.NI\nBrief_reasoning: b")
    assert p.answer == "cs.NI"


@given(st.lists(answer_text(), min_size=1, max_size=5))
def test_last_answer_property(answers):
    text = "\n".join(f"Answer: {a}\nsome text" for a in answers) + "\nBrief_reasoning: r"
    assert parse_response(text).answer == answers[-1]


def test_markdown_answer_key():
    assert parse_response("**Answer:** cs.NI").answer == "cs.NI"
    assert parse_response("answer: Yes").answer == "Yes"


def test_rethink_round_trip_example():
    sections = {t: f"{t} text" for t in SECTION_ORDER}
    p = parse_response(rethink_reply(sections), Variant.RETHINK)
    assert p.format_valid and p.think_present
    assert p.sections == sections


def test_rethink_missing_section():
    sections = {t: "x" for t in SECTION_ORDER}
    text = rethink_reply(sections).replace("<rethink>x</rethink>", "")
    p = parse_response(text, "rethink")
    assert p.sections["rethink"] is None
    assert not check_format(p, "rethink")


def test_sections_outside_think_invalid():
    text = ("<structure>s</structure><semantic>m</semantic><comprehensive>c</comprehensive>"
            "<rethink>r</rethink>\n<think>t</think>\nAnswer: a\nBrief_reasoning: b")
    p = parse_response(text, "rethink")
    assert all(p.sections.values())
    assert not p.format_valid
    # the same text is fine for the normal variant
    assert check_format(p, "normal")


def test_empty_section_invalid():
    sections = {t: "x" for t in SECTION_ORDER}
    sections["semantic"] = "   "
    assert not parse_response(rethink_reply(sections), "rethink").format_valid


def test_normal_needs_brief_reasoning():
    assert not parse_response("Answer: cs.NI").format_valid
    assert parse_response("Answer: cs.NI\nBrief_reasoning: why").format_valid


def test_graph_classification_tokens():
    ok = parse_response("Answer: Yes no YES\nBrief_reasoning: r", kind="graph_classification")
    bad = parse_response("Answer: Yes maybe\nBrief_reasoning: r", kind="graph_classification")
    assert ok.format_valid and not bad.format_valid


def test_regression_answer_must_be_numeric():
    assert parse_response("Answer: -2.35\nBrief_reasoning: r", kind="graph_regression").format_valid
    assert not parse_response("Answer: unknown\nBrief_reasoning: r", kind="graph_regression").format_valid


def test_bond_value():
    text = "Answer: Yes, they have citation relationships\nBrief_reasoning: r\nBond_value: 0.82"
    p = parse_response(text, kind=TaskKind.LINK_PREDICTION)
    assert p.bond_value == pytest.approx(0.82) and not p.bond_clamped
    p = parse_response(text.replace("0.82", "1.7"), kind=TaskKind.LINK_PREDICTION)
    assert p.bond_value == 1.0 and p.bond_clamped and p.format_valid
    # only parsed for link prediction
    assert parse_response(text).bond_value is None


def test_extract_candidates():
    sections = {t: "x" for t in SECTION_ORDER}
    sections["rethink"] = "Comparing cs.NI against cs.IT, the first fits better."
    p = parse_response(rethink_reply(sections), "rethink")
    assert extract_candidates(p, ["cs.NI", "cs.IT", "cs.LG"]) == ["cs.NI", "cs.IT"]
    assert extract_candidates(parse_response(""), ["cs.NI"]) == []


def test_extract_candidates_whole_token():
    sections = {t: "x" for t in SECTION_ORDER}
    sections["comprehensive"] = "1. cs.NI\n2. cs.LG."
    p = parse_response(rethink_reply(sections), "rethink")
    assert extract_candidates(p, ["NI", "cs.NI", "LG", "cs.LG", "cs"]) == ["cs.NI", "cs.LG"]
    sections["comprehensive"] = "Candidates: NI, and maybe networking"
    p = parse_response(rethink_reply(sections), "rethink")
    assert extract_candidates(p, ["NI", "cs.NI", "net"]) == ["NI"]


def test_extract_candidates_case_and_dedup():
    sections = {t: "x" for t in SECTION_ORDER}
    sections["rethink"] = "maybe CS.ni, maybe cs.ni"
    p = parse_response(rethink_reply(sections), "rethink")
    assert extract_candidates(p, ["cs.NI", "cs.NI"]) == ["cs.NI"]


@settings(max_examples=300)
@given(st.fixed_dictionaries({t: section_text() for t in SECTION_ORDER}), answer_text())
def test_generated_rethink_round_trip(sections, answer):
    p = parse_response(rethink_reply(sections, answer=answer), "rethink")
    assert p.format_valid
    assert p.sections == sections
    assert p.answer == answer


@settings(max_examples=500)
@given(st.binary(max_size=400))
def test_parse_is_total(data):
    for variant in Variant:
        for kind in TaskKind:
            p = parse_response(data, variant, kind)
            assert isinstance(p.format_valid, bool)
