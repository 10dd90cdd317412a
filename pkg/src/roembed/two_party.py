"""Two-party objects: Disjointness, gadget trees, embedding certificates.

A gadget tree is the alternating tree obtained from a canonical tree by
replacing each variable leaf with a two-leaf gadget, one leaf read by each
party.  Certificates pair two generalized projection maps (per-coordinate
constants or possibly-negated copies of input slots) and are checked
exhaustively against the definition of an embedding: the embedded function
must agree with the target on every input pair.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from ._bits import bitstring, lowest_set_bit, periodic_mask
from .errors import (
    LengthMismatch,
    MalformedCertificate,
    SizeLimitExceeded,
)
from .formula import AND, OR, CanonicalTree, canonicalize, dual, parse, to_text

ALICE = "A"
BOB = "B"

DISJ = "DISJ"
NDISJ = "NDISJ"

#: Environment variable overriding the exhaustive-verification cap on r.
VERIFY_LIMIT_ENV = "RO_EMBED_VERIFY_LIMIT"
DEFAULT_VERIFY_LIMIT = 12

TRUTH_TABLE_LIMIT = 13


def verify_limit(override: int | None = None) -> int:
    if override is not None:
        return override
    env = os.environ.get(VERIFY_LIMIT_ENV)
    return int(env) if env else DEFAULT_VERIFY_LIMIT


# ---------------------------------------------------------------------------
# DISJ / NDISJ
# ---------------------------------------------------------------------------


def _bits(value: str | Sequence[int], name: str) -> tuple[int, ...]:
    if isinstance(value, str):
        if not value or any(ch not in "01" for ch in value):
            raise LengthMismatch(f"{name} must be a non-empty string over 0/1, got {value!r}")
        return tuple(int(ch) for ch in value)
    bits = tuple(int(bool(b)) for b in value)
    if not bits:
        raise LengthMismatch(f"{name} must be non-empty")
    return bits


def disj(x: str | Sequence[int], y: str | Sequence[int]) -> int:
    """Disjointness: AND over coordinates of (x_i OR y_i)."""
    xs, ys = _bits(x, "x"), _bits(y, "y")
    if len(xs) != len(ys):
        raise LengthMismatch(f"|x| = {len(xs)} but |y| = {len(ys)}")
    return int(all(a | b for a, b in zip(xs, ys)))


def ndisj(x: str | Sequence[int], y: str | Sequence[int]) -> int:
    """Non-Disjointness: OR over coordinates of (x_i AND y_i)."""
    xs, ys = _bits(x, "x"), _bits(y, "y")
    if len(xs) != len(ys):
        raise LengthMismatch(f"|x| = {len(xs)} but |y| = {len(ys)}")
    return int(any(a & b for a, b in zip(xs, ys)))


def embedded_value(embedded: str, x, y) -> int:
    return disj(x, y) if embedded == DISJ else ndisj(x, y)


# ---------------------------------------------------------------------------
# Gadget trees
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GLeaf:
    side: str  # ALICE or BOB
    coord: int  # 1-based coordinate pair index
    negated: bool = False


@dataclass(frozen=True)
class GGate:
    kind: str
    children: tuple["GNode", ...]


GNode = Union[GLeaf, GGate]


@dataclass(frozen=True)
class GadgetTree:
    """Two-party alternating tree with one Alice and one Bob leaf per coordinate."""

    root: GNode
    t: int
    gadget: str | None = None
    source_text: str | None = None
    var_order: tuple[str, ...] | None = None

    @cached_property
    def n_leaves(self) -> int:
        return sum(1 for _ in iter_gleaves(self.root))


def iter_gleaves(node: GNode) -> Iterator[GLeaf]:
    stack: list[GNode] = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, GLeaf):
            yield cur
        else:
            stack.extend(reversed(cur.children))


def iter_gates(node: GNode) -> Iterator[GGate]:
    stack: list[GNode] = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, GGate):
            yield cur
            stack.extend(reversed(cur.children))


def _g_n_leaves(node: GNode) -> int:
    if isinstance(node, GLeaf):
        return 1
    return sum(_g_n_leaves(c) for c in node.children)


def _g_min_coord(node: GNode) -> int:
    if isinstance(node, GLeaf):
        return node.coord
    return min(_g_min_coord(c) for c in node.children)


def _g_struct_key(node: GNode):
    if isinstance(node, GLeaf):
        return ("L", node.coord, 0 if node.side == ALICE else 1, int(node.negated))
    return ("G", node.kind, tuple(_g_struct_key(c) for c in node.children))


def _g_sort_key(node: GNode):
    return (_g_n_leaves(node), _g_min_coord(node), _g_struct_key(node))


def _g_normalize(node: GNode) -> GNode:
    """Flatten same-kind nesting, collapse single-child gates, sort children."""
    if isinstance(node, GLeaf):
        return node
    parts: list[GNode] = []
    for child in node.children:
        sub = _g_normalize(child)
        if isinstance(sub, GGate) and sub.kind == node.kind:
            parts.extend(sub.children)
        else:
            parts.append(sub)
    if len(parts) == 1:
        return parts[0]
    return GGate(node.kind, tuple(sorted(parts, key=_g_sort_key)))


def validate_gadget(g: GadgetTree) -> None:
    """Raise ValueError if a gadget-tree invariant is violated."""
    seen: dict[tuple[str, int], int] = {}
    for leaf in iter_gleaves(g.root):
        if leaf.side not in (ALICE, BOB):
            raise ValueError(f"unknown side {leaf.side!r}")
        key = (leaf.side, leaf.coord)
        seen[key] = seen.get(key, 0) + 1
    for coord in range(1, g.t + 1):
        for side in (ALICE, BOB):
            if seen.pop((side, coord), 0) != 1:
                raise ValueError(f"coordinate {coord} lacks exactly one {side} leaf")
    if seen:
        raise ValueError(f"unexpected leaf coordinates: {sorted(seen)}")

    def go(node: GNode, parent_kind: str | None) -> None:
        if isinstance(node, GLeaf):
            return
        if len(node.children) < 2:
            raise ValueError("gate with fewer than two children")
        if node.kind == parent_kind:
            raise ValueError("gate kind repeats its parent's")
        for child in node.children:
            go(child, node.kind)

    go(g.root, None)


def make_gadget_tree(
    root: GNode,
    gadget: str | None = None,
    source_text: str | None = None,
    var_order: tuple[str, ...] | None = None,
) -> GadgetTree:
    """Normalize and validate a gadget tree built from raw nodes."""
    normalized = _g_normalize(root)
    coords = {leaf.coord for leaf in iter_gleaves(normalized)}
    g = GadgetTree(normalized, len(coords), gadget, source_text, var_order)
    validate_gadget(g)
    return g


def gadget_expand(t: CanonicalTree, gadget: str) -> GadgetTree:
    """Replace each variable leaf by a two-party gadget and re-canonicalize.

    With the OR gadget a positive leaf becomes (x_i OR y_i); a negated leaf
    becomes the dual gate over negated party leaves, since NOT(x OR y) is
    (NOT x AND NOT y).  Gadget nodes that match their parent's kind flatten
    into the parent.  Coordinates are assigned by sorted variable name.
    """
    if gadget not in (AND, OR):
        raise ValueError(f"gadget must be AND or OR, got {gadget!r}")
    order = tuple(sorted(set(t.var_ids)))
    coord_of = {var: i for i, var in enumerate(order, start=1)}

    def go(node) -> GNode:
        if hasattr(node, "var"):  # CLeaf
            i = coord_of[node.var]
            kind = dual(gadget) if node.negated else gadget
            return GGate(
                kind,
                (GLeaf(ALICE, i, node.negated), GLeaf(BOB, i, node.negated)),
            )
        return GGate(node.kind, tuple(go(c) for c in node.children))

    return make_gadget_tree(
        go(t.root), gadget=gadget, source_text=to_text(t), var_order=order
    )


def eval_gadget(g: GadgetTree, x: str | Sequence[int], y: str | Sequence[int]) -> int:
    """Evaluate with Alice leaf i reading x_i and Bob leaf i reading y_i."""
    xs, ys = _bits(x, "x"), _bits(y, "y")
    if len(xs) != g.t or len(ys) != g.t:
        raise LengthMismatch(f"expected |x| = |y| = {g.t}, got {len(xs)}, {len(ys)}")

    def go(node: GNode) -> int:
        if isinstance(node, GLeaf):
            bit = (xs if node.side == ALICE else ys)[node.coord - 1]
            return bit ^ int(node.negated)
        if node.kind == AND:
            return int(all(go(c) for c in node.children))
        return int(any(go(c) for c in node.children))

    return go(g.root)


def truth_table(g: GadgetTree, limit: int = TRUTH_TABLE_LIMIT) -> np.ndarray:
    """Dense 2^t x 2^t matrix with M[x][y] = eval_gadget(g, x, y).

    Row/column index i encodes the bitstring of i, most significant bit
    first (so index order equals lexicographic bitstring order).
    """
    t = g.t
    if t > limit:
        raise SizeLimitExceeded(f"truth table needs t <= {limit}, got {t}")
    size = 1 << t
    full = (1 << size) - 1
    # Bob leaf i varies over column index y: bit pattern periodic in y.
    bob_masks = {}
    for i in range(1, t + 1):
        half = 1 << (t - i)
        bob_masks[i] = periodic_mask(size, half << 1, half, half)

    def go(node: GNode, x: int) -> int:
        if isinstance(node, GLeaf):
            if node.side == ALICE:
                bit = (x >> (t - node.coord)) & 1
                val = full if bit else 0
            else:
                val = bob_masks[node.coord]
            return val ^ full if node.negated else val
        if node.kind == AND:
            acc = full
            for c in node.children:
                acc &= go(c, x)
            return acc
        acc = 0
        for c in node.children:
            acc |= go(c, x)
        return acc

    out = np.zeros((size, size), dtype=np.uint8)
    nbytes = max(1, size // 8)
    for x in range(size):
        row = go(g.root, x)
        raw = np.frombuffer(row.to_bytes(nbytes, "little"), dtype=np.uint8)
        out[x] = np.unpackbits(raw, bitorder="little")[:size]
    return out


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    """Coordinate pinned to a constant bit."""

    bit: int


@dataclass(frozen=True)
class Copy:
    """Coordinate copying input slot ``slot`` (1-based), possibly negated."""

    slot: int
    neg: bool = False


CoordEntry = Union[Fixed, Copy]


class Counterexample(NamedTuple):
    """Lexicographically smallest input pair on which verification failed."""

    x: str
    y: str


@dataclass(frozen=True)
class EmbeddingCertificate:
    """Projection maps witnessing that DISJ_r or NDISJ_r embeds in a target.

    ``h_a`` drives Alice coordinates from her r input slots, ``h_b`` Bob's.
    ``target_formula``/``gadget`` describe targets produced by expanding a
    formula; both are None for directly constructed gadget trees.
    """

    embedded: str  # DISJ or NDISJ
    r: int
    h_a: tuple[CoordEntry, ...]
    h_b: tuple[CoordEntry, ...]
    target_formula: str | None = None
    gadget: str | None = None


def _check_entries(entries: tuple[CoordEntry, ...], r: int, name: str) -> None:
    for entry in entries:
        if isinstance(entry, Fixed):
            if entry.bit not in (0, 1):
                raise MalformedCertificate(f"{name} has a non-bit Fixed entry")
        elif isinstance(entry, Copy):
            if not 1 <= entry.slot <= r:
                raise MalformedCertificate(
                    f"{name} copies slot {entry.slot}, outside 1..{r}"
                )
        else:
            raise MalformedCertificate(f"{name} holds {type(entry).__name__}")


def apply_embedding(
    c: EmbeddingCertificate, x: str | Sequence[int], y: str | Sequence[int]
) -> tuple[str, str]:
    """Map an embedded-instance input pair to a target input pair."""
    xs, ys = _bits(x, "x"), _bits(y, "y")
    if len(xs) != c.r or len(ys) != c.r:
        raise LengthMismatch(f"expected |x| = |y| = {c.r}, got {len(xs)}, {len(ys)}")
    _check_entries(c.h_a, c.r, "h_a")
    _check_entries(c.h_b, c.r, "h_b")

    def project(entries, bits):
        out = []
        for entry in entries:
            if isinstance(entry, Fixed):
                out.append(entry.bit)
            else:
                out.append(bits[entry.slot - 1] ^ int(entry.neg))
        return "".join(str(b) for b in out)

    return project(c.h_a, xs), project(c.h_b, ys)


@lru_cache(maxsize=16)
def _slot_masks(r: int) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    """Masks over pair index (x * 2^r + y) for each input slot, plus all-ones."""
    size = 1 << r
    total = size * size
    full = (1 << total) - 1
    alice = []
    bob = []
    for s in range(1, r + 1):
        xa = size * (1 << (r - s))  # run length of constant x-slot-bit blocks
        alice.append(periodic_mask(total, xa << 1, xa, xa))
        yb = 1 << (r - s)
        bob.append(periodic_mask(total, yb << 1, yb, yb))
    return tuple(alice), tuple(bob), full


def embedded_table_mask(embedded: str, r: int) -> int:
    """Truth table of DISJ_r/NDISJ_r packed over pair index (x * 2^r + y)."""
    alice, bob, full = _slot_masks(r)
    if embedded == DISJ:
        acc = full
        for a_mask, b_mask in zip(alice, bob):
            acc &= a_mask | b_mask
        return acc
    acc = 0
    for a_mask, b_mask in zip(alice, bob):
        acc |= a_mask & b_mask
    return acc


def _cert_target_tree(c: EmbeddingCertificate) -> GadgetTree | None:
    if c.target_formula is None:
        return None
    if c.gadget not in (AND, OR):
        raise MalformedCertificate(f"unknown gadget {c.gadget!r}")
    return gadget_expand(canonicalize(parse(c.target_formula)), c.gadget)


def verify_embedding(
    c: EmbeddingCertificate, g: GadgetTree, limit: int | None = None
) -> Counterexample | None:
    """Exhaustively check the embedding equation; None means verified.

    Every pair (x, y) in {0,1}^r x {0,1}^r is checked; on failure the
    lexicographically smallest counterexample is returned.  Instances with
    r above the cap (default 12, see ``RO_EMBED_VERIFY_LIMIT``) raise
    SizeLimitExceeded rather than enumerate 2^(2r) pairs.
    """
    cap = verify_limit(limit)
    if c.r < 1:
        raise MalformedCertificate("certificates require r >= 1")
    if c.embedded not in (DISJ, NDISJ):
        raise MalformedCertificate(f"unknown embedded function {c.embedded!r}")
    if c.r > cap:
        raise SizeLimitExceeded(f"r = {c.r} exceeds the verification cap {cap}")
    if len(c.h_a) != g.t or len(c.h_b) != g.t:
        raise MalformedCertificate(
            f"coordinate maps cover {len(c.h_a)}/{len(c.h_b)} coordinates, target has {g.t}"
        )
    _check_entries(c.h_a, c.r, "h_a")
    _check_entries(c.h_b, c.r, "h_b")
    declared = _cert_target_tree(c)
    if declared is not None and declared.root != g.root:
        raise MalformedCertificate("certificate target does not match the gadget tree")

    alice, bob, full = _slot_masks(c.r)

    def entry_mask(entry: CoordEntry, masks) -> int:
        if isinstance(entry, Fixed):
            return full if entry.bit else 0
        mask = masks[entry.slot - 1]
        return mask ^ full if entry.neg else mask

    def go(node: GNode) -> int:
        if isinstance(node, GLeaf):
            if node.side == ALICE:
                val = entry_mask(c.h_a[node.coord - 1], alice)
            else:
                val = entry_mask(c.h_b[node.coord - 1], bob)
            return val ^ full if node.negated else val
        if node.kind == AND:
            acc = full
            for child in node.children:
                acc &= go(child)
            return acc
        acc = 0
        for child in node.children:
            acc |= go(child)
        return acc

    got = go(g.root)
    want = embedded_table_mask(c.embedded, c.r)
    diff = got ^ want
    if diff == 0:
        return None
    idx = lowest_set_bit(diff)
    xi, yi = divmod(idx, 1 << c.r)
    return Counterexample(bitstring(xi, c.r), bitstring(yi, c.r))


# ---------------------------------------------------------------------------
# Certificate serialization
# ---------------------------------------------------------------------------


def _entry_to_obj(entry: CoordEntry) -> dict:
    if isinstance(entry, Fixed):
        return {"fixed": entry.bit}
    return {"copy": entry.slot, "neg": bool(entry.neg)}


def _entry_from_obj(obj) -> CoordEntry:
    if not isinstance(obj, dict):
        raise MalformedCertificate(f"map entry must be an object, got {type(obj).__name__}")
    if set(obj) == {"fixed"}:
        if obj["fixed"] not in (0, 1):
            raise MalformedCertificate(f"fixed entry must be 0 or 1, got {obj['fixed']!r}")
        return Fixed(obj["fixed"])
    if set(obj) == {"copy", "neg"}:
        if not isinstance(obj["copy"], int) or isinstance(obj["copy"], bool):
            raise MalformedCertificate("copy slot must be an integer")
        if not isinstance(obj["neg"], bool):
            raise MalformedCertificate("neg must be a bool")
        return Copy(obj["copy"], obj["neg"])
    raise MalformedCertificate(f"unexpected map entry keys {sorted(obj)}")


def cert_to_obj(c: EmbeddingCertificate) -> dict:
    return {
        "embedded": c.embedded,
        "r": c.r,
        "h_a": [_entry_to_obj(e) for e in c.h_a],
        "h_b": [_entry_to_obj(e) for e in c.h_b],
        "target_formula": c.target_formula,
        "gadget": c.gadget,
    }


def cert_from_obj(obj) -> EmbeddingCertificate:
    if not isinstance(obj, dict):
        raise MalformedCertificate("certificate must be a JSON object")
    required = {"embedded", "r", "h_a", "h_b", "target_formula", "gadget"}
    if not required <= set(obj):
        raise MalformedCertificate(f"missing keys {sorted(required - set(obj))}")
    if obj["embedded"] not in (DISJ, NDISJ):
        raise MalformedCertificate(f"unknown embedded function {obj['embedded']!r}")
    if not isinstance(obj["r"], int) or isinstance(obj["r"], bool) or obj["r"] < 1:
        raise MalformedCertificate("r must be a positive integer")
    if obj["gadget"] is not None and obj["gadget"] not in (AND, OR):
        raise MalformedCertificate(f"unknown gadget {obj['gadget']!r}")
    cert = EmbeddingCertificate(
        embedded=obj["embedded"],
        r=obj["r"],
        h_a=tuple(_entry_from_obj(e) for e in obj["h_a"]),
        h_b=tuple(_entry_from_obj(e) for e in obj["h_b"]),
        target_formula=obj["target_formula"],
        gadget=obj["gadget"],
    )
    _check_entries(cert.h_a, cert.r, "h_a")
    _check_entries(cert.h_b, cert.r, "h_b")
    return cert


def cert_to_json(c: EmbeddingCertificate) -> str:
    return json.dumps(cert_to_obj(c))


def cert_from_json(text: str) -> EmbeddingCertificate:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedCertificate(f"invalid JSON: {exc}") from exc
    return cert_from_obj(obj)
