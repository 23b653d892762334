from __future__ import annotations

import pytest

from archlens.errors import QualifiedNameError
from archlens.names import (
    SYNTHETIC_COMPONENT_NAME,
    SYNTHETIC_ENTRY_SIGNATURE,
    UNKNOWN_COMPONENT,
    QualifiedName,
    qualified_name_parse,
)


def test_parse_dotted_chain():
    name = qualified_name_parse("pkg.mod.Cls.run")
    assert name.parts == ("pkg", "mod", "Cls", "run")


def test_parse_single_segment():
    assert qualified_name_parse("main").parts == ("main",)


def test_parse_render_round_trip():
    for text in ["a", "a.b", "pkg.mod.Cls.run", "_x._y", "A1.b2.c3"]:
        assert qualified_name_parse(text).text == text


def test_empty_segment_rejected_with_index():
    with pytest.raises(QualifiedNameError) as err:
        qualified_name_parse("a..b")
    assert "index 1" in str(err.value)


def test_illegal_characters_rejected():
    for bad in ["a.b-c", "1abc", "a b", "a.b!", ""]:
        with pytest.raises(QualifiedNameError):
            qualified_name_parse(bad)


def test_construction_validates_segments():
    with pytest.raises(QualifiedNameError):
        QualifiedName(("ok", "not ok"))
    with pytest.raises(QualifiedNameError):
        QualifiedName(())


def test_parent_and_last():
    name = qualified_name_parse("a.b.c")
    assert name.parent == qualified_name_parse("a.b")
    assert name.last == "c"
    assert qualified_name_parse("a").parent is None


def test_child_and_prefix_relations():
    base = qualified_name_parse("a.b")
    child = base.child("c")
    assert child.text == "a.b.c"
    assert base.is_strict_prefix_of(child)
    assert not child.is_strict_prefix_of(base)
    assert not base.is_strict_prefix_of(base)
    assert child.starts_with(base)
    assert child.starts_with(child)


def test_ordering_is_lexicographic_on_text():
    names = [qualified_name_parse(t) for t in ["b", "a.z", "a", "ab"]]
    assert [n.text for n in sorted(names)] == ["a", "a.z", "ab", "b"]


def test_synthetic_literal_is_the_only_grammar_exception():
    assert SYNTHETIC_COMPONENT_NAME.parts == (UNKNOWN_COMPONENT,)
    assert SYNTHETIC_COMPONENT_NAME.is_synthetic
    assert SYNTHETIC_ENTRY_SIGNATURE.text == UNKNOWN_COMPONENT + ".entry"
    assert SYNTHETIC_ENTRY_SIGNATURE.parent == SYNTHETIC_COMPONENT_NAME
    # near misses of the reserved literal stay illegal
    with pytest.raises(QualifiedNameError):
        QualifiedName(("++ unknown component +",))
    assert not qualified_name_parse("entry").is_synthetic


def test_synthetic_sorts_before_identifiers():
    assert SYNTHETIC_COMPONENT_NAME < qualified_name_parse("Aaa")
    assert SYNTHETIC_COMPONENT_NAME < qualified_name_parse("_x")
