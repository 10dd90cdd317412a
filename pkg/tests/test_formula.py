import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from roembed.errors import (
    DegenerateConstant,
    FormulaSyntaxError,
    MissingVariable,
    ReadOnceViolation,
)
from roembed.formula import (
    AND,
    OR,
    CGate,
    CLeaf,
    CanonicalTree,
    Const,
    Formula,
    Gate,
    Leaf,
    Not,
    canonicalize,
    evaluate,
    formula_of,
    from_json,
    leaf_levels,
    parse,
    restrict,
    to_dot,
    to_json,
    to_text,
    validate_canonical,
)


def ast_eval(node, assignment):
    """Independent reference evaluator for raw ASTs (the test-side oracle)."""
    if isinstance(node, Leaf):
        return assignment[node.var]
    if isinstance(node, Not):
        return 1 - ast_eval(node.child, assignment)
    if isinstance(node, Const):
        return node.value
    vals = [ast_eval(c, assignment) for c in node.children]
    return min(vals) if node.kind == AND else max(vals)


def all_assignments(variables):
    variables = sorted(variables)
    for bits in itertools.product((0, 1), repeat=len(variables)):
        yield dict(zip(variables, bits))


# ---------------------------------------------------------------------------
# parse
# ---------------------------------------------------------------------------


def test_parse_binary_and():
    f = parse("z1 & z2")
    assert f.root == Gate(AND, (Leaf("z1"), Leaf("z2")))


def test_parse_preserves_grouping():
    f = parse("(z1 & z2) & z3")
    assert f.root == Gate(AND, (Gate(AND, (Leaf("z1"), Leaf("z2"))), Leaf("z3")))


def test_parse_same_level_run_is_nary():
    f = parse("z1 & z2 & z3")
    assert f.root == Gate(AND, (Leaf("z1"), Leaf("z2"), Leaf("z3")))


def test_parse_precedence_and_keywords():
    assert parse("z1 | z2 & z3").root == parse("z1 OR z2 AND z3").root
    assert parse("z1 | z2 & z3").root == Gate(
        OR, (Leaf("z1"), Gate(AND, (Leaf("z2"), Leaf("z3"))))
    )
    assert parse("not z1").root == Not(Leaf("z1"))


def test_parse_read_once_violation():
    with pytest.raises(ReadOnceViolation) as exc:
        parse("z1 & z1")
    assert exc.value.var_id == "z1"


@pytest.mark.parametrize("text", ["", "z1 &", "(z1 | z2", "z1 z2", "& z1", "z1 ) z2", "z1 & $"])
def test_parse_syntax_errors_carry_position(text):
    with pytest.raises(FormulaSyntaxError) as exc:
        parse(text)
    assert 0 <= exc.value.position <= len(text)


# ---------------------------------------------------------------------------
# canonicalize
# ---------------------------------------------------------------------------


def test_canonicalize_flattens_associativity():
    t = canonicalize(parse("(z1 & z2) & z3"))
    assert t.root == CGate(AND, (CLeaf("z1"), CLeaf("z2"), CLeaf("z3")))


def test_canonicalize_de_morgan():
    t = canonicalize(parse("!(z1 | z2)"))
    assert t.root == CGate(AND, (CLeaf("z1", True), CLeaf("z2", True)))


def test_canonicalize_already_alternating():
    t = canonicalize(parse("(z1 | z2) & (z3 | z4)"))
    assert t.root == CGate(
        AND,
        (
            CGate(OR, (CLeaf("z1"), CLeaf("z2"))),
            CGate(OR, (CLeaf("z3"), CLeaf("z4"))),
        ),
    )
    assert t.depth == 2
    assert t.n_leaves == 4


def test_canonicalize_double_negation_and_nested_not():
    assert canonicalize(parse("!!z1")).root == CLeaf("z1")
    assert canonicalize(parse("!(!z1 & !z2)")).root == CGate(OR, (CLeaf("z1"), CLeaf("z2")))


def test_canonicalize_idempotent():
    for text in ("z1", "!(z1|z2)&(z3|!z4)", "((z1&z2)|z3)&z4", "!((z1 | !z2) & z3)"):
        t = canonicalize(parse(text))
        again = canonicalize(formula_of(t))
        assert again == t


def test_canonicalize_degenerate_constant():
    with pytest.raises(DegenerateConstant) as exc:
        canonicalize(Formula(Gate(AND, (Leaf("z1"), Const(0)))))
    assert exc.value.value == 0


def test_canonicalize_rejects_duplicates_in_ast():
    with pytest.raises(ReadOnceViolation):
        canonicalize(Formula(Gate(OR, (Leaf("z1"), Not(Leaf("z1"))))))


def test_single_variable_formula_is_legal():
    t = canonicalize(parse("z1"))
    assert t.root == CLeaf("z1")
    assert t.n_leaves == 1 and t.depth == 0
    validate_canonical(t)


# ---------------------------------------------------------------------------
# evaluate / restrict / leaf_levels
# ---------------------------------------------------------------------------


def test_evaluate_basic():
    t = canonicalize(parse("z1 & z2"))
    assert evaluate(t, {"z1": 1, "z2": 1}) == 1
    t2 = canonicalize(parse("(z1|z2)&(z3|z4)"))
    assert evaluate(t2, {"z1": 1, "z2": 0, "z3": 0, "z4": 0}) == 0
    assert evaluate(canonicalize(parse("!z1")), {"z1": 1}) == 0


def test_evaluate_missing_variable():
    t = canonicalize(parse("z1 & z2"))
    with pytest.raises(MissingVariable):
        evaluate(t, {"z1": 1})


def test_restrict_examples():
    t = canonicalize(parse("(z1|z2)&(z3|z4)"))
    assert restrict(t, {"z3": 1}) == canonicalize(parse("z1|z2"))
    assert restrict(t, {"z3": 0, "z4": 0}) == Const(0)
    t2 = canonicalize(parse("z1|z2"))
    r = restrict(t2, {"z2": 0})
    assert isinstance(r, CanonicalTree) and r.root == CLeaf("z1")


def test_restrict_applies_polarity():
    t = canonicalize(parse("!z1 & z2"))
    assert restrict(t, {"z1": 0}) == canonicalize(parse("z2"))
    assert restrict(t, {"z1": 1}) == Const(0)


def test_restrict_rejects_unknown_variable():
    t = canonicalize(parse("z1 & z2"))
    with pytest.raises(MissingVariable):
        restrict(t, {"z9": 1})


def test_leaf_levels():
    odd, even = leaf_levels(canonicalize(parse("z1 & (z2 | (z3 & z4))")))
    assert odd == {"z1", "z3", "z4"}
    assert even == {"z2"}

    odd, even = leaf_levels(canonicalize(parse("(z1|z2)&(z3|z4)")))
    assert odd == frozenset()
    assert even == {"z1", "z2", "z3", "z4"}

    odd, even = leaf_levels(canonicalize(parse("z1")))
    assert odd == frozenset() and even == {"z1"}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_json_round_trip_bit_exact():
    t = canonicalize(parse("!(z1 | z2) & (z3 | !z4)"))
    text = to_json(t)
    assert from_json(text) == t
    assert to_json(from_json(text)) == text
    obj = json.loads(text)
    assert list(obj.keys()) == ["gate", "children"]
    leaf = obj["children"][0]["children"][0] if "children" in obj["children"][0] else obj["children"][0]
    assert list(leaf.keys()) == ["var", "neg"]


def test_from_json_rejects_malformed():
    with pytest.raises(ValueError):
        from_json('{"gate": "XOR", "children": []}')
    with pytest.raises(ValueError):
        from_json('{"var": "z1"}')
    with pytest.raises(ValueError):
        # not in canonical order / not alternating
        from_json('{"gate": "AND", "children": [{"gate": "AND", "children": ['
                  '{"var": "z1", "neg": false}, {"var": "z2", "neg": false}]}, '
                  '{"var": "z3", "neg": false}]}')


def test_dot_export_labels():
    dot = to_dot(canonicalize(parse("!z1 & z2")))
    assert dot.startswith("digraph")
    assert '[label="AND"]' in dot
    assert '[label="¬z1"]' in dot
    assert '[label="z2"]' in dot


def test_to_text_round_trip():
    for text in ("z1", "!z1 & (z2 | z3)", "(z1 | !z2) & z3 & (z4 | z5)"):
        t = canonicalize(parse(text))
        assert canonicalize(parse(to_text(t))) == t


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


def random_ast(rng, variables):
    """Random raw AST using each variable exactly once."""
    if len(variables) == 1:
        node = Leaf(variables[0])
    else:
        k = rng.randint(2, min(4, len(variables)))
        cuts = sorted(rng.sample(range(1, len(variables)), k - 1))
        parts = []
        prev = 0
        for cut in list(cuts) + [len(variables)]:
            parts.append(variables[prev:cut])
            prev = cut
        kind = rng.choice((AND, OR))
        node = Gate(kind, tuple(random_ast(rng, p) for p in parts))
    while rng.random() < 0.3:
        node = Not(node)
    return node


@pytest.mark.parametrize("seed", range(40))
def test_canonicalize_preserves_semantics(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    variables = [f"z{i}" for i in range(1, n + 1)]
    rng.shuffle(variables)
    root = random_ast(rng, variables)
    t = canonicalize(Formula(root))
    validate_canonical(t)
    for a in all_assignments(variables):
        assert evaluate(t, a) == ast_eval(root, a)


@pytest.mark.parametrize("seed", range(20))
def test_restrict_commutes_with_evaluate(seed):
    rng = random.Random(1000 + seed)
    n = rng.randint(2, 7)
    variables = [f"z{i}" for i in range(1, n + 1)]
    root = random_ast(rng, variables)
    t = canonicalize(Formula(root))
    fixed_vars = rng.sample(variables, rng.randint(1, n - 1))
    fixed = {v: rng.randint(0, 1) for v in fixed_vars}
    restricted = restrict(t, fixed)
    free = [v for v in variables if v not in fixed]
    for a in all_assignments(free):
        total = {**a, **fixed}
        if isinstance(restricted, Const):
            assert evaluate(t, total) == restricted.value
        else:
            validate_canonical(restricted)
            assert evaluate(restricted, a) == evaluate(t, total)


@st.composite
def formula_nodes(draw, variables):
    """Hypothesis strategy for raw ASTs over a fixed variable pool."""
    if len(variables) == 1:
        node = Leaf(variables[0])
    else:
        k = draw(st.integers(2, min(3, len(variables))))
        cut_positions = draw(
            st.lists(st.integers(1, len(variables) - 1), min_size=k - 1, max_size=k - 1, unique=True)
        )
        parts = []
        prev = 0
        for cut in sorted(cut_positions) + [len(variables)]:
            parts.append(variables[prev:cut])
            prev = cut
        kind = draw(st.sampled_from((AND, OR)))
        node = Gate(kind, tuple(draw(formula_nodes(tuple(p))) for p in parts))
    for _ in range(draw(st.integers(0, 2))):
        node = Not(node)
    return node


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_canonical_equivalence_hypothesis(data):
    n = data.draw(st.integers(1, 5))
    variables = tuple(f"z{i}" for i in range(1, n + 1))
    root = data.draw(formula_nodes(variables))
    t = canonicalize(Formula(root))
    validate_canonical(t)
    for a in all_assignments(variables):
        assert evaluate(t, a) == ast_eval(root, a)
