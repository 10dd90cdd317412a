"""Read-once Boolean formulas and their canonical alternating AND-OR trees.

The surface grammar accepts AND/OR/NOT formulas over named variables.
``canonicalize`` reduces a parsed formula to the unique alternating AND-OR
tree: negations are pushed onto leaves by De Morgan's laws, nested gates of
the same kind are flattened, single-child gates collapse, constants
propagate out, and children are put into a deterministic canonical order.
Structural equality of canonical trees therefore decides equality of
canonical forms.

Every value here is immutable after construction; all operations are pure
functions of their inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Union

from .errors import (
    DegenerateConstant,
    FormulaSyntaxError,
    MissingVariable,
    ReadOnceViolation,
)

AND = "AND"
OR = "OR"


def dual(kind: str) -> str:
    """The other gate kind: AND <-> OR."""
    return OR if kind == AND else AND


def neutral(kind: str) -> int:
    """Constant that leaves a gate unchanged: 1 for AND, 0 for OR."""
    return 1 if kind == AND else 0


def absorbing(kind: str) -> int:
    """Constant that forces a gate: 0 for AND, 1 for OR."""
    return 0 if kind == AND else 1


# ---------------------------------------------------------------------------
# Raw AST (exactly what was written, before any normalization)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    var: str


@dataclass(frozen=True)
class Not:
    child: "FNode"


@dataclass(frozen=True)
class Gate:
    kind: str
    children: tuple["FNode", ...]


@dataclass(frozen=True)
class Const:
    """Constant bit.  Never produced by the parser; ``restrict`` uses it."""

    value: int


FNode = Union[Leaf, Not, Gate, Const]


@dataclass(frozen=True)
class Formula:
    """A parsed formula with its structure as written."""

    root: FNode

    def var_ids(self) -> frozenset[str]:
        return frozenset(_iter_vars(self.root))


def _iter_vars(node) -> Iterator[str]:
    if isinstance(node, (Leaf, CLeaf)):
        yield node.var
    elif isinstance(node, Not):
        yield from _iter_vars(node.child)
    elif isinstance(node, (Gate, CGate)):
        for child in node.children:
            yield from _iter_vars(child)


def _find_duplicate_var(node) -> str | None:
    seen: set[str] = set()
    for var in _iter_vars(node):
        if var in seen:
            return var
        seen.add(var)
    return None


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_KEYWORD_OPS = {"AND": "&", "OR": "|", "NOT": "!"}
_PUNCT = set("&|!()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, position) triples; kinds are '&|!()' and 'var'."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            op = _KEYWORD_OPS.get(word.upper())
            if op is not None:
                tokens.append((op, word, i))
            else:
                tokens.append(("var", word, i))
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", position=i)
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> str | None:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def _here(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return len(self.text)

    def _take(self, kind: str) -> tuple[str, str, int]:
        if self._peek() != kind:
            got = self.tokens[self.pos][1] if self.pos < len(self.tokens) else "end of input"
            raise FormulaSyntaxError(f"unexpected {got!r}", self._here(), expected=kind)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> FNode:
        node = self._or_expr()
        if self._peek() is not None:
            raise FormulaSyntaxError(
                f"unexpected {self.tokens[self.pos][1]!r} after formula", self._here()
            )
        return node

    def _or_expr(self) -> FNode:
        items = [self._and_expr()]
        while self._peek() == "|":
            self.pos += 1
            items.append(self._and_expr())
        return items[0] if len(items) == 1 else Gate(OR, tuple(items))

    def _and_expr(self) -> FNode:
        items = [self._unary()]
        while self._peek() == "&":
            self.pos += 1
            items.append(self._unary())
        return items[0] if len(items) == 1 else Gate(AND, tuple(items))

    def _unary(self) -> FNode:
        if self._peek() == "!":
            self.pos += 1
            return Not(self._unary())
        return self._atom()

    def _atom(self) -> FNode:
        kind = self._peek()
        if kind == "var":
            return Leaf(self._take("var")[1])
        if kind == "(":
            self.pos += 1
            node = self._or_expr()
            self._take(")")
            return node
        got = self.tokens[self.pos][1] if self.pos < len(self.tokens) else "end of input"
        raise FormulaSyntaxError(
            f"unexpected {got!r}", self._here(), expected="a variable, '!' or '('"
        )


def parse(text: str) -> Formula:
    """Parse surface syntax into a raw :class:`Formula`.

    Variables are identifiers such as ``z1``; operators are ``&``/``AND``,
    ``|``/``OR`` and ``!``/``NOT`` (keywords are case-insensitive, AND binds
    tighter than OR); parentheses group; whitespace is insignificant.  Runs
    of the same operator at one nesting level parse into a single n-ary
    gate, while parenthesized grouping is preserved as written.

    Raises :class:`FormulaSyntaxError` on bad syntax and
    :class:`ReadOnceViolation` if any variable occurs twice.
    """
    root = _Parser(text).parse()
    duplicate = _find_duplicate_var(root)
    if duplicate is not None:
        raise ReadOnceViolation(duplicate)
    return Formula(root)


# ---------------------------------------------------------------------------
# Canonical trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CLeaf:
    var: str
    negated: bool = False


@dataclass(frozen=True)
class CGate:
    kind: str
    children: tuple["CNode", ...]


CNode = Union[CLeaf, CGate]


@dataclass(frozen=True)
class CanonicalTree:
    """Alternating AND-OR tree with negations only at leaves.

    Instances are produced by :func:`canonicalize`; constructing one by hand
    bypasses the invariants, so run :func:`validate_canonical` afterwards if
    you do.
    """

    root: CNode

    @cached_property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    @cached_property
    def depth(self) -> int:
        def go(node: CNode) -> int:
            if isinstance(node, CLeaf):
                return 0
            return 1 + max(go(c) for c in node.children)

        return go(self.root)

    @cached_property
    def var_ids(self) -> tuple[str, ...]:
        """Variable names in leaf (left-to-right) order."""
        return tuple(leaf.var for leaf in self.leaves())

    def leaves(self) -> Iterator[CLeaf]:
        stack: list[CNode] = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, CLeaf):
                yield node
            else:
                stack.extend(reversed(node.children))

    def __str__(self) -> str:
        return to_text(self)


def _n_leaves(node: CNode) -> int:
    if isinstance(node, CLeaf):
        return 1
    return sum(_n_leaves(c) for c in node.children)


def _min_var(node: CNode) -> str:
    if isinstance(node, CLeaf):
        return node.var
    return min(_min_var(c) for c in node.children)


def _struct_key(node: CNode):
    if isinstance(node, CLeaf):
        return ("L", node.var, int(node.negated))
    return ("G", node.kind, tuple(_struct_key(c) for c in node.children))


def _sort_key(node: CNode):
    # Canonical child order: leaf count, then smallest variable in the
    # subtree, then a full structural key as the final tie breaker.
    return (_n_leaves(node), _min_var(node), _struct_key(node))


def _normalize(node: FNode, negated: bool) -> CNode | int:
    """Push negations to leaves and rebuild bottom-up; ints are constants."""
    if isinstance(node, Leaf):
        return CLeaf(node.var, negated)
    if isinstance(node, Const):
        return node.value ^ int(negated)
    if isinstance(node, Not):
        return _normalize(node.child, not negated)
    if isinstance(node, CLeaf):  # allow pre-canonical nodes as input
        return CLeaf(node.var, node.negated ^ negated)
    if isinstance(node, CGate):
        node = Gate(node.kind, node.children)
    kind = dual(node.kind) if negated else node.kind
    parts: list[CNode] = []
    for child in node.children:
        sub = _normalize(child, negated)
        if isinstance(sub, int):
            if sub == absorbing(kind):
                return sub
            continue  # neutral constant disappears
        if isinstance(sub, CGate) and sub.kind == kind:
            parts.extend(sub.children)
        else:
            parts.append(sub)
    if not parts:
        return neutral(kind)
    if len(parts) == 1:
        return parts[0]
    return CGate(kind, tuple(sorted(parts, key=_sort_key)))


def canonicalize(f: Formula | FNode) -> CanonicalTree:
    """Reduce a read-once formula to its canonical alternating AND-OR tree.

    The result computes the same Boolean function on every total assignment
    and is idempotent: canonicalizing a formula that is already in canonical
    form returns an identical tree.

    Raises :class:`ReadOnceViolation` for duplicated variables and
    :class:`DegenerateConstant` if the whole formula reduces to a constant
    (only possible when the input contains :class:`Const` nodes).
    """
    root = f.root if isinstance(f, Formula) else f
    duplicate = _find_duplicate_var(root)
    if duplicate is not None:
        raise ReadOnceViolation(duplicate)
    result = _normalize(root, False)
    if isinstance(result, int):
        raise DegenerateConstant(result)
    return CanonicalTree(result)


def evaluate(t: CanonicalTree, assignment: Mapping[str, int]) -> int:
    """Evaluate the tree under a total assignment; returns 0 or 1."""

    def go(node: CNode) -> int:
        if isinstance(node, CLeaf):
            if node.var not in assignment:
                raise MissingVariable(node.var)
            return int(bool(assignment[node.var])) ^ int(node.negated)
        if node.kind == AND:
            return int(all(go(c) for c in node.children))
        return int(any(go(c) for c in node.children))

    return go(t.root)


def restrict(t: CanonicalTree, partial: Mapping[str, int]) -> CanonicalTree | Const:
    """Fix some variables and re-canonicalize.

    Assigned leaves become constants (polarity applied), free variables keep
    their names.  Returns :class:`Const` when the function becomes constant.
    """
    known = set(t.var_ids)
    for var in partial:
        if var not in known:
            raise MissingVariable(var)

    def subst(node: CNode) -> FNode:
        if isinstance(node, CLeaf):
            if node.var in partial:
                return Const(int(bool(partial[node.var])) ^ int(node.negated))
            return Not(Leaf(node.var)) if node.negated else Leaf(node.var)
        return Gate(node.kind, tuple(subst(c) for c in node.children))

    try:
        return canonicalize(subst(t.root))
    except DegenerateConstant as exc:
        return Const(exc.value)


def leaf_levels(t: CanonicalTree) -> tuple[frozenset[str], frozenset[str]]:
    """Partition variables by leaf level parity: (odd, even).

    The root is level 0 and a leaf's level is its edge distance from the
    root, so a bare-leaf tree puts its variable in the even set.
    """
    odd: set[str] = set()
    even: set[str] = set()
    stack: list[tuple[CNode, int]] = [(t.root, 0)]
    while stack:
        node, level = stack.pop()
        if isinstance(node, CLeaf):
            (odd if level % 2 else even).add(node.var)
        else:
            stack.extend((c, level + 1) for c in node.children)
    return frozenset(odd), frozenset(even)


def validate_canonical(t: CanonicalTree) -> None:
    """Raise ValueError if any canonical-form invariant is violated."""
    seen_vars: set[str] = set()

    def go(node: CNode, parent_kind: str | None) -> None:
        if isinstance(node, CLeaf):
            if node.var in seen_vars:
                raise ValueError(f"duplicate variable {node.var!r}")
            seen_vars.add(node.var)
            return
        if not isinstance(node, CGate):
            raise ValueError(f"unexpected node {node!r}")
        if len(node.children) < 2:
            raise ValueError("gate with fewer than two children")
        if node.kind == parent_kind:
            raise ValueError(f"gate kind {node.kind} repeats its parent's")
        keys = [_sort_key(c) for c in node.children]
        if any(a >= b for a, b in zip(keys, keys[1:])):
            raise ValueError("children are not in canonical order")
        for child in node.children:
            go(child, node.kind)

    go(t.root, None)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def tree_to_obj(t: CanonicalTree) -> dict:
    """JSON-ready dict: {"gate","children"} / {"var","neg"} with fixed key order."""

    def go(node: CNode):
        if isinstance(node, CLeaf):
            return {"var": node.var, "neg": bool(node.negated)}
        return {"gate": node.kind, "children": [go(c) for c in node.children]}

    return go(t.root)


def tree_from_obj(obj) -> CanonicalTree:
    def go(item) -> CNode:
        if not isinstance(item, dict):
            raise ValueError(f"expected an object, got {type(item).__name__}")
        if set(item) == {"var", "neg"}:
            if not isinstance(item["var"], str) or not isinstance(item["neg"], bool):
                raise ValueError("leaf fields must be a string and a bool")
            return CLeaf(item["var"], item["neg"])
        if set(item) == {"gate", "children"}:
            if item["gate"] not in (AND, OR):
                raise ValueError(f"unknown gate {item['gate']!r}")
            return CGate(item["gate"], tuple(go(c) for c in item["children"]))
        raise ValueError(f"unexpected keys {sorted(item)}")

    tree = CanonicalTree(go(obj))
    validate_canonical(tree)
    return tree


def to_json(t: CanonicalTree) -> str:
    return json.dumps(tree_to_obj(t))


def from_json(text: str) -> CanonicalTree:
    return tree_from_obj(json.loads(text))


def to_dot(t: CanonicalTree) -> str:
    """Graphviz rendering; internal nodes AND/OR, leaves ``z1`` / ``¬z1``."""
    lines = ["digraph canonical_tree {"]
    counter = 0

    def go(node: CNode) -> str:
        nonlocal counter
        name = f"n{counter}"
        counter += 1
        if isinstance(node, CLeaf):
            label = ("¬" if node.negated else "") + node.var
        else:
            label = node.kind
        lines.append(f'  {name} [label="{label}"];')
        if isinstance(node, CGate):
            for child in node.children:
                child_name = go(child)
                lines.append(f"  {name} -> {child_name};")
        return name

    go(t.root)
    lines.append("}")
    return "\n".join(lines)


def to_text(t: CanonicalTree) -> str:
    """Surface-syntax rendering that parses back to an identical tree."""

    def go(node: CNode, top: bool) -> str:
        if isinstance(node, CLeaf):
            return ("!" if node.negated else "") + node.var
        sep = " & " if node.kind == AND else " | "
        body = sep.join(go(c, False) for c in node.children)
        return body if top else f"({body})"

    return go(t.root, True)


def formula_of(t: CanonicalTree) -> Formula:
    """Re-express a canonical tree as a raw AST (for re-parsing or rewriting)."""

    def go(node: CNode) -> FNode:
        if isinstance(node, CLeaf):
            return Not(Leaf(node.var)) if node.negated else Leaf(node.var)
        return Gate(node.kind, tuple(go(c) for c in node.children))

    return Formula(go(t.root))
