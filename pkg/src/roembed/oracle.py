"""Independent brute-force ground truth for the rest of the library.

Nothing here shares logic with the construction path: equivalence checking
enumerates every assignment, the embedding search enumerates the whole
projection-certificate space (with a completeness-preserving slot-order
normalization on the Alice side), and the rank computation is exact
fraction-free elimination over the integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._bits import lowest_set_bit, variable_mask
from .errors import PreconditionFailed, SizeLimitExceeded
from .formula import CGate, CLeaf, CanonicalTree, Const, Formula, Gate, Leaf, Not, AND
from .two_party import (
    DISJ,
    NDISJ,
    Copy,
    EmbeddingCertificate,
    Fixed,
    GadgetTree,
    truth_table,
)

_SEARCH_CANDIDATE_GUARD = 10**8


@dataclass(frozen=True)
class SearchConfig:
    max_t: int = 4
    max_r: int = 4
    embedded: str = DISJ


# ---------------------------------------------------------------------------
# Exhaustive equivalence
# ---------------------------------------------------------------------------


def _vars_of(f) -> frozenset[str]:
    if isinstance(f, CanonicalTree):
        return frozenset(f.var_ids)
    node = f.root if isinstance(f, Formula) else f
    out: set[str] = set()
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, (Leaf, CLeaf)):
            out.add(cur.var)
        elif isinstance(cur, Not):
            stack.append(cur.child)
        elif isinstance(cur, (Gate, CGate)):
            stack.extend(cur.children)
    return frozenset(out)


def _mask_eval(node, masks: dict[str, int], full: int) -> int:
    """Evaluate a raw AST or canonical node over all assignments at once."""
    if isinstance(node, Leaf):
        return masks[node.var]
    if isinstance(node, CLeaf):
        value = masks[node.var]
        return value ^ full if node.negated else value
    if isinstance(node, Not):
        return full ^ _mask_eval(node.child, masks, full)
    if isinstance(node, Const):
        return full if node.value else 0
    acc = full if node.kind == AND else 0
    for child in node.children:
        sub = _mask_eval(child, masks, full)
        acc = acc & sub if node.kind == AND else acc | sub
    return acc


def equiv_check(a, b, limit: int = 20) -> dict[str, int] | None:
    """Compare two formulas/trees on every assignment; None means equal.

    Otherwise returns the first differing assignment, enumerating with the
    alphabetically first variable as the fastest-changing bit.
    """
    va, vb = _vars_of(a), _vars_of(b)
    if va != vb:
        raise PreconditionFailed(
            f"variable sets differ: {sorted(va ^ vb)} not shared"
        )
    order = sorted(va)
    n = len(order)
    if n > limit:
        raise SizeLimitExceeded(f"equivalence check needs n <= {limit}, got {n}")
    total = 1 << n
    full = (1 << total) - 1
    masks = {v: variable_mask(total, k) for k, v in enumerate(order)}
    root_a = a.root if isinstance(a, (Formula, CanonicalTree)) else a
    root_b = b.root if isinstance(b, (Formula, CanonicalTree)) else b
    diff = _mask_eval(root_a, masks, full) ^ _mask_eval(root_b, masks, full)
    if diff == 0:
        return None
    idx = lowest_set_bit(diff)
    return {v: (idx >> k) & 1 for k, v in enumerate(order)}


# ---------------------------------------------------------------------------
# Exhaustive projection-embedding search
# ---------------------------------------------------------------------------


def _alice_maps(t: int, r: int):
    """All Alice coordinate maps covering slots 1..r, slot-order normalized.

    Copies must introduce slots in increasing first-use order; composing
    both sides of any certificate with a slot permutation is again a
    certificate for the (slot-symmetric) embedded function, so searching
    normalized Alice maps against all Bob maps stays complete.
    """
    entries: list[Fixed | Copy] = []

    def rec(pos: int, used: int):
        if pos == t:
            if used == r:
                yield tuple(entries)
            return
        remaining = t - pos - 1
        for entry, new_used in _entry_options(used, r):
            if r - new_used > remaining:
                continue
            entries.append(entry)
            yield from rec(pos + 1, new_used)
            entries.pop()

    yield from rec(0, 0)


def _entry_options(used: int, r: int):
    yield Fixed(0), used
    yield Fixed(1), used
    for slot in range(1, min(used + 1, r) + 1):
        for neg in (False, True):
            yield Copy(slot, neg), max(used, slot)


def _bob_entry_options(r: int):
    options: list[Fixed | Copy] = [Fixed(0), Fixed(1)]
    for slot in range(1, r + 1):
        options.append(Copy(slot, False))
        options.append(Copy(slot, True))
    return options


def _entry_bits(entry, values: np.ndarray, r: int) -> np.ndarray:
    if isinstance(entry, Fixed):
        return np.full(values.shape, entry.bit, dtype=np.int64)
    bits = (values >> (r - entry.slot)) & 1
    return bits ^ 1 if entry.neg else bits


def _find_bob_map(valid: list[int], t: int, r: int):
    """Bob map (lex order) sending every b into its valid target set, if any."""
    n_b = len(valid)
    options = _bob_entry_options(r)
    chosen: list[Fixed | Copy] = []

    def rec(depth: int, prefixes: list[int], used: frozenset[int]):
        if depth == t:
            if len(used) == r:
                return tuple(chosen)
            return None
        shift = t - depth - 1
        width = 1 << shift
        window = (1 << width) - 1
        for entry in options:
            new_used = used | {entry.slot} if isinstance(entry, Copy) else used
            if r - len(new_used) > shift:
                continue
            new_prefixes = []
            feasible = True
            for b in range(n_b):
                bit = (
                    entry.bit
                    if isinstance(entry, Fixed)
                    else ((b >> (r - entry.slot)) & 1) ^ int(entry.neg)
                )
                p = (prefixes[b] << 1) | bit
                if not valid[b] & (window << (p << shift)):
                    feasible = False
                    break
                new_prefixes.append(p)
            if not feasible:
                continue
            chosen.append(entry)
            found = rec(depth + 1, new_prefixes, new_used)
            if found is not None:
                return found
            chosen.pop()
        return None

    return rec(0, [0] * n_b, frozenset())


def _search_r(M: np.ndarray, t: int, r: int, embedded: str):
    n = 1 << r
    avals = np.arange(n, dtype=np.int64)
    if embedded == DISJ:
        D = ((avals[:, None] | avals[None, :]) == n - 1).astype(np.int64)
    else:
        D = ((avals[:, None] & avals[None, :]) != 0).astype(np.int64)
    pow2 = (np.int64(1) << avals)
    dcode = pow2 @ D  # per column b

    for h_a in _alice_maps(t, r):
        rows = np.zeros(n, dtype=np.int64)
        for entry in h_a:
            rows = (rows << 1) | _entry_bits(entry, avals, r)
        colcode = pow2 @ M[rows].astype(np.int64)
        valid: list[int] = []
        for b in range(n):
            mask = 0
            for y in np.flatnonzero(colcode == dcode[b]):
                mask |= 1 << int(y)
            if mask == 0:
                break
            valid.append(mask)
        else:
            h_b = _find_bob_map(valid, t, r)
            if h_b is not None:
                return h_a, h_b
    return None


def best_projection_embedding(
    g: GadgetTree, cfg: SearchConfig = SearchConfig()
) -> tuple[int, EmbeddingCertificate | None]:
    """Largest r whose DISJ_r/NDISJ_r admits a verified projection pair.

    Enumerates r from the cap downwards; embeddability is monotone in r
    (fix one slot appropriately to drop it), so the first hit is the
    maximum.  Returns (0, None) when even r = 1 has no certificate.
    """
    if g.t > cfg.max_t:
        raise SizeLimitExceeded(f"search needs t <= {cfg.max_t}, got {g.t}")
    if (2 + 2 * cfg.max_r) ** (2 * cfg.max_t) > _SEARCH_CANDIDATE_GUARD:
        raise SizeLimitExceeded("candidate space exceeds the enumeration guard")
    if cfg.embedded not in (DISJ, NDISJ):
        raise ValueError(f"embedded must be DISJ or NDISJ, got {cfg.embedded!r}")
    M = truth_table(g)
    for r in range(min(cfg.max_r, g.t), 0, -1):
        found = _search_r(M, g.t, r, cfg.embedded)
        if found is not None:
            h_a, h_b = found
            cert = EmbeddingCertificate(
                embedded=cfg.embedded,
                r=r,
                h_a=h_a,
                h_b=h_b,
                target_formula=g.source_text,
                gadget=g.gadget,
            )
            return r, cert
    return 0, None


# ---------------------------------------------------------------------------
# Exact rank
# ---------------------------------------------------------------------------


def matrix_rank_exact(matrix) -> int:
    """Rank over the rationals via fraction-free (Bareiss) elimination."""
    mat = [[int(v) for v in row] for row in matrix]
    if not mat or not mat[0]:
        return 0
    m, n = len(mat), len(mat[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(n):
        pivot = next((i for i in range(row, m) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        for i in range(row + 1, m):
            factor = mat[i][col]
            lead = mat[row][col]
            for j in range(col + 1, n):
                mat[i][j] = (lead * mat[i][j] - factor * mat[row][j]) // prev
            mat[i][col] = 0
        prev = mat[row][col]
        rank += 1
        row += 1
        if row == m:
            break
    return rank


def log_rank(g: GadgetTree, limit: int = 10) -> float:
    """log2 of the exact rational rank of the gadget's truth table.

    Duplicate rows and columns are removed first (rank-preserving); a rank
    of zero reports 0.0 by convention.
    """
    if g.t > limit:
        raise SizeLimitExceeded(f"log_rank needs t <= {limit}, got {g.t}")
    M = truth_table(g)
    rows = sorted({tuple(int(v) for v in row) for row in M})
    cols = sorted({tuple(col) for col in zip(*rows)})
    deduped = [list(row) for row in zip(*cols)]
    rank = matrix_rank_exact(deduped)
    return math.log2(rank) if rank else 0.0
