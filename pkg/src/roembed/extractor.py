"""Certificate construction by dynamic programming over gadget trees.

Every tree node is summarized bottom-up with the best Disjointness and
Non-Disjointness witnesses found for its subtree, one exposable leaf per
party, and nothing else; parents combine child summaries:

* An AND node concatenates its children's DISJ witnesses (children without
  one are forced to the AND-neutral constant 1), so DISJ sizes add.  Its
  NDISJ value is the best single child witness, or 1 from a cross pair: one
  child exposing an Alice leaf and a different child exposing a Bob leaf
  realize an AND of opposite-side literals once every other sibling is
  neutralized.
* An OR node is the exact mirror (NDISJ adds, DISJ takes max or a cross
  pair, the neutral constant is 0).

A witness is a restriction of the remaining leaves plus an ordered list of
(Alice leaf, Bob leaf) blocks; block j becomes input slot j of the embedded
instance, with copy polarity absorbing leaf negations.  Every certificate
this module emits is checked before it is returned: exhaustively up to the
verification cap, and structurally (the restricted tree must canonicalize
to the exact DISJ/NDISJ gadget shape) plus by random sampling above it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .errors import DegenerateConstant, PreconditionFailed, SizeLimitExceeded, VerificationFailed
from .formula import (
    AND,
    OR,
    CanonicalTree,
    CGate,
    CLeaf,
    Const,
    dual,
    leaf_levels,
    neutral,
    restrict,
)
from .two_party import (
    ALICE,
    BOB,
    DISJ,
    NDISJ,
    Copy,
    EmbeddingCertificate,
    Fixed,
    GadgetTree,
    GGate,
    GLeaf,
    GNode,
    apply_embedding,
    cert_to_obj,
    embedded_value,
    eval_gadget,
    gadget_expand,
    iter_gleaves,
    verify_embedding,
    verify_limit,
    _g_sort_key,
)

_SPOT_CHECK_SAMPLES = 1000


# ---------------------------------------------------------------------------
# Structure measures and elementary restrictions
# ---------------------------------------------------------------------------


def s_count(g: GadgetTree) -> tuple[int, bool]:
    """Count internal nodes all of whose children are leaves.

    The second component reports whether the tree meets the two-party
    pairing shape: every node with a leaf child has exactly two children,
    both leaves, one per party.
    """
    s = 0
    shape_ok = True
    stack: list[GNode] = [g.root]
    while stack:
        node = stack.pop()
        if isinstance(node, GLeaf):
            continue
        leaf_children = [c for c in node.children if isinstance(c, GLeaf)]
        if len(leaf_children) == len(node.children):
            s += 1
        if leaf_children:
            sides = {c.side for c in leaf_children}
            if len(node.children) != 2 or len(leaf_children) != 2 or sides != {ALICE, BOB}:
                shape_ok = False
        stack.extend(node.children)
    if isinstance(g.root, GLeaf):
        shape_ok = False
    return s, shape_ok


def force_const(node: GNode, b: int) -> dict[tuple[str, int], int]:
    """Restriction fixing every leaf of the subtree so it evaluates to b.

    Each literal is set to b (negated leaves get the complemented input
    bit); a monotone gate tree over constant-b literals evaluates to b.
    """
    return {
        (leaf.side, leaf.coord): b ^ int(leaf.negated) for leaf in iter_gleaves(node)
    }


def _find_path(root: GNode, leaf: GLeaf) -> list[GNode] | None:
    if root == leaf:
        return [root]
    if isinstance(root, GLeaf):
        return None
    for child in root.children:
        sub = _find_path(child, leaf)
        if sub is not None:
            return [root] + sub
    return None


def expose_leaf(g: GadgetTree, leaf: GLeaf) -> dict[tuple[str, int], int]:
    """Restriction isolating one leaf: the tree then computes its literal.

    Walking down from the root, every sibling subtree is forced to the
    enclosing gate's neutral element (1 under AND, 0 under OR).
    """
    path = _find_path(g.root, leaf)
    if path is None:
        raise ValueError(f"leaf {leaf} is not in the tree")
    fixes: dict[tuple[str, int], int] = {}
    for node, next_node in zip(path, path[1:]):
        b = neutral(node.kind)
        for child in node.children:
            if child is not next_node:
                fixes.update(force_const(child, b))
    return fixes


# ---------------------------------------------------------------------------
# The witness DP
# ---------------------------------------------------------------------------


@dataclass
class _Witness:
    blocks: list[tuple[GLeaf, GLeaf]]  # (Alice leaf, Bob leaf) per slot
    fixed: dict[tuple[str, int], int]

    @property
    def size(self) -> int:
        return len(self.blocks)


@dataclass
class _Summary:
    """Per-subtree DP record."""

    disj: _Witness | None
    ndisj: _Witness | None
    alice: tuple[GLeaf, dict] | None  # exposable leaf + exposing restriction
    bob: tuple[GLeaf, dict] | None


def _additive(node: GGate, summaries: list[_Summary], attr: str, neut: int) -> _Witness | None:
    blocks: list[tuple[GLeaf, GLeaf]] = []
    fixed: dict[tuple[str, int], int] = {}
    any_witness = False
    for child, summary in zip(node.children, summaries):
        w = getattr(summary, attr)
        if w is None:
            fixed.update(force_const(child, neut))
        else:
            blocks.extend(w.blocks)
            fixed.update(w.fixed)
            any_witness = True
    return _Witness(blocks, fixed) if any_witness else None


def _max_or_cross(node: GGate, summaries: list[_Summary], attr: str, neut: int) -> _Witness | None:
    best_index = -1
    best: _Witness | None = None
    for i, summary in enumerate(summaries):
        w = getattr(summary, attr)
        if w is not None and (best is None or w.size > best.size):
            best, best_index = w, i
    if best is not None:
        fixed = dict(best.fixed)
        for j, child in enumerate(node.children):
            if j != best_index:
                fixed.update(force_const(child, neut))
        return _Witness(list(best.blocks), fixed)
    # Cross pair: Alice literal from one child, Bob literal from another.
    for i, si in enumerate(summaries):
        if si.alice is None:
            continue
        for j, sj in enumerate(summaries):
            if j == i or sj.bob is None:
                continue
            a_leaf, a_fix = si.alice
            b_leaf, b_fix = sj.bob
            fixed = dict(a_fix)
            fixed.update(b_fix)
            for k, child in enumerate(node.children):
                if k not in (i, j):
                    fixed.update(force_const(child, neut))
            return _Witness([(a_leaf, b_leaf)], fixed)
    return None


def _first_exposable(node: GGate, summaries: list[_Summary], attr: str):
    for i, summary in enumerate(summaries):
        found = getattr(summary, attr)
        if found is None:
            continue
        leaf, inner = found
        fixes = dict(inner)
        b = neutral(node.kind)
        for j, child in enumerate(node.children):
            if j != i:
                fixes.update(force_const(child, b))
        return leaf, fixes
    return None


def _summarize(node: GNode) -> _Summary:
    if isinstance(node, GLeaf):
        exposed = (node, {})
        return _Summary(
            disj=None,
            ndisj=None,
            alice=exposed if node.side == ALICE else None,
            bob=exposed if node.side == BOB else None,
        )
    summaries = [_summarize(c) for c in node.children]
    if node.kind == AND:
        disj_w = _additive(node, summaries, "disj", 1)
        ndisj_w = _max_or_cross(node, summaries, "ndisj", 1)
    else:
        ndisj_w = _additive(node, summaries, "ndisj", 0)
        disj_w = _max_or_cross(node, summaries, "disj", 0)
    return _Summary(
        disj=disj_w,
        ndisj=ndisj_w,
        alice=_first_exposable(node, summaries, "alice"),
        bob=_first_exposable(node, summaries, "bob"),
    )


def _witness_to_certificate(g: GadgetTree, w: _Witness, embedded: str) -> EmbeddingCertificate:
    entries_a: dict[int, Fixed | Copy] = {}
    entries_b: dict[int, Fixed | Copy] = {}
    for slot, (a_leaf, b_leaf) in enumerate(w.blocks, start=1):
        entries_a[a_leaf.coord] = Copy(slot, a_leaf.negated)
        entries_b[b_leaf.coord] = Copy(slot, b_leaf.negated)
    for (side, coord), bit in w.fixed.items():
        (entries_a if side == ALICE else entries_b)[coord] = Fixed(bit)
    if set(entries_a) != set(range(1, g.t + 1)) or set(entries_b) != set(entries_a):
        raise VerificationFailed("witness does not cover every coordinate")
    return EmbeddingCertificate(
        embedded=embedded,
        r=w.size,
        h_a=tuple(entries_a[i] for i in range(1, g.t + 1)),
        h_b=tuple(entries_b[i] for i in range(1, g.t + 1)),
        target_formula=g.source_text,
        gadget=g.gadget,
    )


# ---------------------------------------------------------------------------
# Certificate checking
# ---------------------------------------------------------------------------


def _expected_shape(embedded: str, r: int) -> GNode:
    pair_kind = OR if embedded == DISJ else AND
    pairs = tuple(
        GGate(pair_kind, (GLeaf(ALICE, j), GLeaf(BOB, j))) for j in range(1, r + 1)
    )
    if r == 1:
        return pairs[0]
    return GGate(dual(pair_kind), pairs)


def _substituted_shape(c: EmbeddingCertificate, g: GadgetTree) -> GNode | None:
    """Target tree with the certificate maps substituted in, over slot leaves.

    Returns None when the substitution repeats a slot on one side (the
    result would not be a read-once tree) or collapses to a constant.
    """
    used: set[tuple[str, int]] = set()
    repeated = False

    def sub(node: GNode) -> GNode | int:
        nonlocal repeated
        if isinstance(node, GLeaf):
            entry = (c.h_a if node.side == ALICE else c.h_b)[node.coord - 1]
            if isinstance(entry, Fixed):
                return entry.bit ^ int(node.negated)
            key = (node.side, entry.slot)
            if key in used:
                repeated = True
            used.add(key)
            return GLeaf(node.side, entry.slot, entry.neg ^ node.negated)
        parts: list[GNode] = []
        for child in node.children:
            s = sub(child)
            if isinstance(s, int):
                if s != neutral(node.kind):
                    return s  # absorbing constant
                continue
            if isinstance(s, GGate) and s.kind == node.kind:
                parts.extend(s.children)
            else:
                parts.append(s)
        if not parts:
            return neutral(node.kind)
        if len(parts) == 1:
            return parts[0]
        return GGate(node.kind, tuple(sorted(parts, key=_g_sort_key)))

    shape = sub(g.root)
    if repeated or isinstance(shape, int):
        return None
    return shape


def check_certificate(
    c: EmbeddingCertificate,
    g: GadgetTree,
    limit: int | None = None,
    strict: bool = False,
) -> None:
    """Raise VerificationFailed unless the certificate is correct.

    Within the cap this is the exhaustive verifier.  Above it, ``strict``
    raises SizeLimitExceeded; otherwise the certificate is proved by
    substitution (the mapped tree must canonicalize to the exact embedded
    gadget shape, which implies functional equality on all inputs) and
    additionally spot-checked on random input pairs.
    """
    cap = verify_limit(limit)
    if c.r <= cap:
        counterexample = verify_embedding(c, g, limit=cap)
        if counterexample is not None:
            raise VerificationFailed(
                f"certificate for {c.embedded}_{c.r} failed", counterexample
            )
        return
    if strict:
        raise SizeLimitExceeded(
            f"r = {c.r} exceeds the verification cap {cap} and strict checking is on"
        )
    if _substituted_shape(c, g) != _expected_shape(c.embedded, c.r):
        raise VerificationFailed(
            f"substituted tree is not the {c.embedded}_{c.r} shape"
        )
    rng = random.Random(0x5EED ^ (c.r << 16) ^ g.t)
    for _ in range(_SPOT_CHECK_SAMPLES):
        x = "".join(str(rng.getrandbits(1)) for _ in range(c.r))
        y = "".join(str(rng.getrandbits(1)) for _ in range(c.r))
        gx, gy = apply_embedding(c, x, y)
        if embedded_value(c.embedded, x, y) != eval_gadget(g, gx, gy):
            raise VerificationFailed(
                f"certificate for {c.embedded}_{c.r} failed", (x, y)
            )


# ---------------------------------------------------------------------------
# extract and the pipelines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtractionResult:
    """Largest embeddings found plus the structural guarantee bookkeeping.

    ``guarantee_met`` is the product inequality m0 * m1 >= s whenever the
    two-party pairing precondition applies (and vacuously true otherwise,
    so a clean run always reports it set).
    """

    m0: int
    m1: int
    cert0: EmbeddingCertificate | None
    cert1: EmbeddingCertificate | None
    s: int
    claim1_applicable: bool
    guarantee_met: bool

    def to_obj(self) -> dict:
        return {
            "m0": self.m0,
            "m1": self.m1,
            "s": self.s,
            "claim1_ok": self.claim1_applicable,
            "guarantee_met": self.guarantee_met,
            "cert0": cert_to_obj(self.cert0) if self.cert0 else None,
            "cert1": cert_to_obj(self.cert1) if self.cert1 else None,
        }


def extract(
    g: GadgetTree, verify_cap: int | None = None, strict_verify: bool = False
) -> ExtractionResult:
    """Run the witness DP and return checked certificates.

    Raises VerificationFailed if a produced certificate fails its check
    (an internal bug guard, not an input error).
    """
    summary = _summarize(g.root)
    s, shape_ok = s_count(g)
    applicable = shape_ok and g.n_leaves > 2

    def finish(w: _Witness | None, embedded: str) -> EmbeddingCertificate | None:
        if w is None or w.size == 0:
            return None
        cert = _witness_to_certificate(g, w, embedded)
        check_certificate(cert, g, limit=verify_cap, strict=strict_verify)
        return cert

    cert0 = finish(summary.disj, DISJ)
    cert1 = finish(summary.ndisj, NDISJ)
    m0 = cert0.r if cert0 else 0
    m1 = cert1.r if cert1 else 0
    guarantee = (not applicable) or m0 * m1 >= s
    return ExtractionResult(m0, m1, cert0, cert1, s, applicable, guarantee)


def uniform_leaf_parent_kind(t: CanonicalTree) -> str | None:
    """AND/OR if every leaf's parent gate has that kind, else None."""
    if isinstance(t.root, CLeaf):
        return None
    kinds: set[str] = set()

    def go(node: CGate) -> None:
        for child in node.children:
            if isinstance(child, CLeaf):
                kinds.add(node.kind)
            else:
                go(child)

    go(t.root)
    return kinds.pop() if len(kinds) == 1 else None


def lemma_pipeline(
    t: CanonicalTree, verify_cap: int | None = None, strict_verify: bool = False
) -> ExtractionResult:
    """Pick the gadget by the leaf-parent case split, expand, and extract.

    Trees whose leaf parents are all AND take the OR gadget; all-OR takes
    the AND gadget.  Mixed parent kinds (or a bare-leaf tree) raise
    PreconditionFailed; use :func:`theorem_pipeline` for those.
    """
    kind = uniform_leaf_parent_kind(t)
    if kind is None:
        raise PreconditionFailed(
            "leaf parents are not uniformly one gate kind; use theorem_pipeline"
        )
    gadget = OR if kind == AND else AND
    g = gadget_expand(t, gadget)
    return extract(g, verify_cap=verify_cap, strict_verify=strict_verify)


@dataclass
class TheoremReport:
    """Outcome of the level-split pipeline on an arbitrary formula."""

    side: str  # "odd" or "even": which leaf-level class was kept
    n_kept: int
    restriction: dict[str, int]
    result: ExtractionResult
    gadget: str
    fallback_mixed: bool
    bound_R: str
    bound_Q: str

    def to_obj(self) -> dict:
        obj = self.result.to_obj()
        obj.update(
            {
                "side": self.side,
                "n_kept": self.n_kept,
                "restriction": dict(sorted(self.restriction.items())),
                "bound_R": self.bound_R,
                "bound_Q": self.bound_Q,
                "gadget": self.gadget,
                "fallback_mixed": self.fallback_mixed,
            }
        )
        return obj


def _discard_restriction(t: CanonicalTree, kept: frozenset[str]) -> dict[str, int]:
    """Fix all leaves outside ``kept``, preserving every kept leaf.

    A subtree containing no kept leaf is forced wholesale to its parent
    gate's neutral element; this covers single discarded leaves and also
    gates whose children (directly or through deeper gates) are all
    discarded, which would otherwise turn into absorbing constants.
    """

    def vars_of(node) -> set[str]:
        if isinstance(node, CLeaf):
            return {node.var}
        out: set[str] = set()
        for child in node.children:
            out |= vars_of(child)
        return out

    fixes: dict[str, int] = {}

    def rec(gate: CGate) -> None:
        b = neutral(gate.kind)
        for child in gate.children:
            if not (vars_of(child) & kept):
                if isinstance(child, CLeaf):
                    fixes[child.var] = b ^ int(child.negated)
                else:
                    for leaf_var, leaf_neg in _leaves_with_polarity(child):
                        fixes[leaf_var] = b ^ leaf_neg
            elif isinstance(child, CGate):
                rec(child)

    if isinstance(t.root, CGate):
        rec(t.root)
    return fixes


def _leaves_with_polarity(node) -> list[tuple[str, int]]:
    if isinstance(node, CLeaf):
        return [(node.var, int(node.negated))]
    out: list[tuple[str, int]] = []
    for child in node.children:
        out.extend(_leaves_with_polarity(child))
    return out


def _degenerate_report(
    t: CanonicalTree,
    side: str,
    restriction: dict[str, int],
    verify_cap: int | None,
    strict_verify: bool,
) -> TheoremReport:
    # Single surviving variable: its OR-gadget expansion is one gadget node.
    g = gadget_expand(t, OR)
    res = extract(g, verify_cap=verify_cap, strict_verify=strict_verify)
    m = max(res.m0, res.m1)
    return TheoremReport(
        side=side,
        n_kept=1,
        restriction=restriction,
        result=res,
        gadget=OR,
        fallback_mixed=False,
        bound_R=f"Omega({m})",
        bound_Q=f"Omega(sqrt {m})",
    )


def theorem_pipeline(
    t: CanonicalTree,
    side: str | None = None,
    verify_cap: int | None = None,
    strict_verify: bool = False,
) -> TheoremReport:
    """Keep the larger leaf-level class, restrict the rest away, and extract.

    The kept class has uniform leaf-parent kind in the original tree, so
    the restricted tree normally feeds :func:`lemma_pipeline`; when
    re-canonicalization collapses single-child gates and mixes the parent
    kinds, both gadget expansions are extracted and the better one is
    reported with ``fallback_mixed`` set.

    ``side`` forces "odd" or "even" instead of taking the larger class.
    """
    odd, even = leaf_levels(t)
    if side is None:
        side = "odd" if len(odd) >= len(even) else "even"
    elif side not in ("odd", "even"):
        raise ValueError(f"side must be 'odd' or 'even', got {side!r}")
    kept = odd if side == "odd" else even
    if not kept:
        raise PreconditionFailed(f"no leaves on {side} levels")

    restriction = _discard_restriction(t, kept)
    restricted = restrict(t, restriction) if restriction else t
    if isinstance(restricted, Const):
        # Unreachable with the neutral-forcing repair; kept defensively.
        raise DegenerateConstant(restricted.value)

    if isinstance(restricted.root, CLeaf):
        return _degenerate_report(restricted, side, restriction, verify_cap, strict_verify)

    kind = uniform_leaf_parent_kind(restricted)
    if kind is not None:
        gadget = OR if kind == AND else AND
        res = extract(
            gadget_expand(restricted, gadget),
            verify_cap=verify_cap,
            strict_verify=strict_verify,
        )
        fallback = False
    else:
        by_gadget = {
            gadget: extract(
                gadget_expand(restricted, gadget),
                verify_cap=verify_cap,
                strict_verify=strict_verify,
            )
            for gadget in (OR, AND)
        }
        gadget = OR
        if max(by_gadget[AND].m0, by_gadget[AND].m1) > max(by_gadget[OR].m0, by_gadget[OR].m1):
            gadget = AND
        res = by_gadget[gadget]
        fallback = True

    m = max(res.m0, res.m1)
    return TheoremReport(
        side=side,
        n_kept=restricted.n_leaves,
        restriction=restriction,
        result=res,
        gadget=gadget,
        fallback_mixed=fallback,
        bound_R=f"Omega({m})",
        bound_Q=f"Omega(sqrt {m})",
    )
