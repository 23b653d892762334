"""Reader for DOT graph text, specialized to grouped-graph recovery.

Parses the standard DOT grammar (graph/digraph, subgraphs, attribute lists,
quoted/bare/numeric/HTML ids, comments, edge chains, subgraph endpoints).
Interpretation is the inverse of the model exporter up to attribute loss:

- `subgraph "cluster_<id>"` blocks become groups (id = text after the
  prefix); all other subgraphs only scope their contents.
- node statements become leaves of the group they first appear in; a later
  mention never moves a leaf.
- a node's `label` attribute and a cluster's `label=...;` assignment set the
  display label; without one the label defaults to the id's last dotted
  segment.
- edges keep their `weight` (default 1) and `kind` (default "call")
  attributes; every other attribute is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from archlens.errors import DotParseError
from archlens.grouped import GraphEdge, Group, GroupedGraph, Leaf, _short_label

_KEYWORDS = frozenset({"strict", "graph", "digraph", "subgraph", "node", "edge"})
_PUNCT = frozenset("{}[];,=:")


@dataclass(frozen=True)
class _Token:
    kind: str  # "id", "punct", "edgeop", "eof"
    value: str
    line: int
    column: int


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ord(ch) > 127


def _is_name_part(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or ord(ch) > 127


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.column = 1

    def _fail(self, message: str) -> DotParseError:
        return DotParseError(message, self.line, self.column)

    def _advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.pos < len(self.text):
                if self.text[self.pos] == "\n":
                    self.line += 1
                    self.column = 1
                else:
                    self.column += 1
                self.pos += 1

    def _skip_trivia(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance()
            elif ch == "#":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            elif ch == "/" and text.startswith("//", self.pos):
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance()
            elif ch == "/" and text.startswith("/*", self.pos):
                end = text.find("*/", self.pos + 2)
                if end < 0:
                    raise self._fail("unterminated block comment")
                self._advance(end + 2 - self.pos)
            else:
                return

    def _read_quoted(self) -> str:
        # Opening quote already current. Handles \" and \\ plus
        # backslash-newline continuations; other escapes pass through.
        line, column = self.line, self.column
        self._advance()
        parts: list[str] = []
        while True:
            if self.pos >= len(self.text):
                raise DotParseError("unterminated quoted string", line, column)
            ch = self.text[self.pos]
            if ch == '"':
                self._advance()
                return "".join(parts)
            if ch == "\\" and self.pos + 1 < len(self.text):
                follower = self.text[self.pos + 1]
                if follower in ('"', "\\"):
                    parts.append(follower)
                    self._advance(2)
                    continue
                if follower == "\n":
                    self._advance(2)
                    continue
            parts.append(ch)
            self._advance()

    def _read_html(self) -> str:
        line, column = self.line, self.column
        depth = 0
        parts: list[str] = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            parts.append(ch)
            if ch == "<":
                depth += 1
            elif ch == ">":
                depth -= 1
                if depth == 0:
                    self._advance()
                    return "".join(parts)
            self._advance()
        raise DotParseError("unterminated HTML string", line, column)

    def _read_id(self) -> str:
        ch = self.text[self.pos]
        if ch == '"':
            value = self._read_quoted()
            # DOT concatenates quoted strings joined by '+'.
            while True:
                mark = (self.pos, self.line, self.column)
                self._skip_trivia()
                if self.pos < len(self.text) and self.text[self.pos] == "+":
                    self._advance()
                    self._skip_trivia()
                    if self.pos >= len(self.text) or self.text[self.pos] != '"':
                        raise self._fail("expected quoted string after '+'")
                    value += self._read_quoted()
                else:
                    self.pos, self.line, self.column = mark
                    return value
        if ch == "<":
            return self._read_html()
        if _is_name_start(ch):
            start = self.pos
            while self.pos < len(self.text) and _is_name_part(self.text[self.pos]):
                self._advance()
            return self.text[start : self.pos]
        # Numeral: [-]?(.digits | digits[.digits])
        start = self.pos
        if ch == "-":
            self._advance()
        seen_digit = False
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            seen_digit = True
            self._advance()
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self._advance()
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                seen_digit = True
                self._advance()
        if not seen_digit:
            raise DotParseError(
                f"unexpected character {ch!r}", self.line, self.column
            )
        return self.text[start : self.pos]

    def tokens(self) -> list[_Token]:
        out: list[_Token] = []
        while True:
            self._skip_trivia()
            if self.pos >= len(self.text):
                out.append(_Token("eof", "", self.line, self.column))
                return out
            line, column = self.line, self.column
            ch = self.text[self.pos]
            if ch == "-" and self.text.startswith(("->", "--"), self.pos):
                op = self.text[self.pos : self.pos + 2]
                self._advance(2)
                out.append(_Token("edgeop", op, line, column))
            elif ch in _PUNCT:
                self._advance()
                out.append(_Token("punct", ch, line, column))
            else:
                out.append(_Token("id", self._read_id(), line, column))


@dataclass
class _GroupFrame:
    group_id: str
    label: str | None = None
    children: list["_GroupFrame"] = field(default_factory=list)
    leaf_ids: list[str] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str):
        self.toks = _Tokenizer(text).tokens()
        self.index = 0
        self.directed = True
        self.leaf_labels: dict[str, str | None] = {}
        self.edges: list[GraphEdge] = []
        self.anon_counter = 0

    # ---------------------------------------------------------- token access

    def peek(self) -> _Token:
        return self.toks[self.index]

    def next(self) -> _Token:
        tok = self.toks[self.index]
        if tok.kind != "eof":
            self.index += 1
        return tok

    def fail(self, message: str, tok: _Token | None = None) -> DotParseError:
        tok = tok or self.peek()
        return DotParseError(message, tok.line, tok.column)

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "id" and tok.value.lower() == word

    def at_punct(self, ch: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.value == ch

    def expect_punct(self, ch: str) -> _Token:
        if not self.at_punct(ch):
            raise self.fail(f"expected {ch!r}")
        return self.next()

    def expect_id(self) -> _Token:
        tok = self.peek()
        if tok.kind != "id":
            raise self.fail("expected an identifier")
        return self.next()

    # ---------------------------------------------------------- grammar

    def parse(self) -> GroupedGraph:
        if self.at_keyword("strict"):
            self.next()
        if self.at_keyword("digraph"):
            self.next()
        elif self.at_keyword("graph"):
            self.directed = False
            self.next()
        else:
            raise self.fail("expected 'graph' or 'digraph'")
        root_id = "G"
        if self.peek().kind == "id":
            root_id = self.next().value
        # The root label defaults to empty, unlike clusters: an unnamed graph
        # round-trips to a model with an empty label.
        root = _GroupFrame(group_id=root_id, label="")
        self.expect_punct("{")
        self.parse_statements(root)
        self.expect_punct("}")
        tok = self.peek()
        if tok.kind != "eof":
            raise self.fail("trailing content after closing '}'", tok)
        return GroupedGraph.build(self._freeze(root), self.edges)

    def parse_statements(self, scope: _GroupFrame) -> None:
        while not self.at_punct("}"):
            tok = self.peek()
            if tok.kind == "eof":
                raise self.fail("unexpected end of input, expected '}'")
            if self.at_punct(";"):
                self.next()
                continue
            self.parse_statement(scope)

    def parse_statement(self, scope: _GroupFrame) -> None:
        if self.at_keyword("subgraph") or self.at_punct("{"):
            endpoints = self.parse_subgraph(scope)
            if self.peek().kind == "edgeop":
                self.parse_edge_chain(scope, endpoints)
            return
        if self.at_keyword("node") or self.at_keyword("edge"):
            self.next()
            self.parse_attr_lists()  # defaults are not tracked
            return
        if self.at_keyword("graph"):
            self.next()
            attrs = self.parse_attr_lists()
            if "label" in attrs:
                scope.label = attrs["label"]
            return
        tok = self.expect_id()
        if self.at_punct("="):
            self.next()
            value = self.expect_id()
            if tok.value.lower() == "label":
                scope.label = value.value
            return
        leaf_id = tok.value
        self.skip_port()
        if self.peek().kind == "edgeop":
            self.declare_leaf(scope, leaf_id)
            self.parse_edge_chain(scope, [leaf_id])
            return
        attrs = self.parse_attr_lists()
        self.declare_leaf(scope, leaf_id, attrs.get("label"))

    def parse_subgraph(self, scope: _GroupFrame) -> list[str]:
        """Parse a subgraph block; returns the leaf ids it contains so the
        caller can use it as an edge endpoint."""
        name = None
        if self.at_keyword("subgraph"):
            self.next()
            if self.peek().kind == "id":
                name = self.next().value
        self.expect_punct("{")
        is_cluster = name is not None and name.startswith("cluster_")
        if is_cluster:
            frame = _GroupFrame(group_id=name[len("cluster_") :])
            existing = next(
                (c for c in scope.children if c.group_id == frame.group_id), None
            )
            frame = existing or frame
            if existing is None:
                scope.children.append(frame)
        else:
            # Plain subgraphs only scope their contents; parse into a holding
            # frame so the leaf set is known, then merge into the enclosure.
            frame = _GroupFrame(group_id=scope.group_id)
        self.parse_statements(frame)
        self.expect_punct("}")
        leaf_ids = self._collect_leaf_ids(frame)
        if not is_cluster:
            scope.children.extend(frame.children)
            scope.leaf_ids.extend(frame.leaf_ids)
        return leaf_ids

    def parse_edge_chain(self, scope: _GroupFrame, first: list[str]) -> None:
        hops: list[list[str]] = [first]
        while self.peek().kind == "edgeop":
            op = self.next()
            if (op.value == "->") != self.directed:
                want = "->" if self.directed else "--"
                raise self.fail(f"expected {want!r} in this graph type", op)
            if self.at_keyword("subgraph") or self.at_punct("{"):
                hops.append(self.parse_subgraph(scope))
            else:
                tok = self.expect_id()
                self.skip_port()
                self.declare_leaf(scope, tok.value)
                hops.append([tok.value])
        attrs = self.parse_attr_lists()
        weight = 1
        if "weight" in attrs:
            try:
                weight = int(attrs["weight"])
            except ValueError:
                raise self.fail(f"weight is not an integer: {attrs['weight']!r}")
        kind = attrs.get("kind", "call")
        for sources, targets in zip(hops, hops[1:]):
            for source in sources:
                for target in targets:
                    self.edges.append(GraphEdge(source, target, weight, kind))

    def parse_attr_lists(self) -> dict[str, str]:
        attrs: dict[str, str] = {}
        while self.at_punct("["):
            self.next()
            while not self.at_punct("]"):
                key = self.expect_id()
                self.expect_punct("=")
                value = self.expect_id()
                attrs[key.value] = value.value
                if self.at_punct(",") or self.at_punct(";"):
                    self.next()
            self.expect_punct("]")
        return attrs

    def skip_port(self) -> None:
        while self.at_punct(":"):
            self.next()
            self.expect_id()

    # ---------------------------------------------------------- semantics

    def declare_leaf(
        self, scope: _GroupFrame, leaf_id: str, label: str | None = None
    ) -> None:
        if leaf_id not in self.leaf_labels:
            self.leaf_labels[leaf_id] = label
            scope.leaf_ids.append(leaf_id)
        elif label is not None:
            self.leaf_labels[leaf_id] = label

    def _collect_leaf_ids(self, frame: _GroupFrame) -> list[str]:
        out = list(frame.leaf_ids)
        for child in frame.children:
            out.extend(self._collect_leaf_ids(child))
        return out

    def _freeze(self, frame: _GroupFrame) -> Group:
        return Group(
            group_id=frame.group_id,
            label=frame.label if frame.label is not None else _short_label(frame.group_id),
            children=tuple(self._freeze(c) for c in frame.children),
            leaves=tuple(
                Leaf(
                    leaf_id,
                    label
                    if (label := self.leaf_labels[leaf_id]) is not None
                    else _short_label(leaf_id),
                )
                for leaf_id in frame.leaf_ids
            ),
        )


def read_dot(text: str) -> GroupedGraph:
    """Parse DOT text into a GroupedGraph; raises DotParseError with the
    offending line and column on ungrammatical input."""
    return _Parser(text).parse()
