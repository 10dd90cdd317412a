import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from roembed.errors import PreconditionFailed, SizeLimitExceeded
from roembed.extractor import extract
from roembed.formula import AND, OR, canonicalize, parse
from roembed.oracle import (
    SearchConfig,
    best_projection_embedding,
    equiv_check,
    log_rank,
    matrix_rank_exact,
)
from roembed.two_party import DISJ, NDISJ, gadget_expand, truth_table, verify_embedding

from gen_util import enum_polarized_trees, with_polarities


def expand(text, gadget):
    return gadget_expand(canonicalize(parse(text)), gadget)


# ---------------------------------------------------------------------------
# equiv_check
# ---------------------------------------------------------------------------


def test_equiv_de_morgan():
    f = parse("!(z1 | z2)")
    assert equiv_check(f, canonicalize(f)) is None


def test_equiv_counterexample():
    got = equiv_check(parse("z1 & z2"), parse("z1 | z2"))
    assert got == {"z1": 1, "z2": 0}


def test_equiv_requires_same_variables():
    with pytest.raises(PreconditionFailed):
        equiv_check(parse("z1"), parse("z2"))


def test_equiv_size_guard():
    big = " & ".join(f"z{i}" for i in range(1, 23))
    f = parse(big)
    with pytest.raises(SizeLimitExceeded):
        equiv_check(f, f)


@pytest.mark.parametrize("seed", range(25))
def test_equiv_random_canonicalization(seed):
    from roembed.cli import GenSpec, generate_formula
    from gen_util import rewrite
    from roembed.formula import Formula, formula_of

    rng = random.Random(seed)
    t = generate_formula(GenSpec(n_leaves=rng.randint(1, 10), negation_prob=0.3, seed=seed))
    messy = Formula(rewrite(formula_of(t).root, rng))
    assert equiv_check(messy, t) is None
    assert equiv_check(messy, canonicalize(messy)) is None


# ---------------------------------------------------------------------------
# best_projection_embedding
# ---------------------------------------------------------------------------


def test_search_disj2_identity_target():
    g = expand("z1 & z2", OR)
    m, cert = best_projection_embedding(g, SearchConfig(embedded=DISJ))
    assert m == 2
    assert verify_embedding(cert, g) is None


def test_search_ndisj_in_disj2_target():
    g = expand("z1 & z2", OR)
    m, cert = best_projection_embedding(g, SearchConfig(embedded=NDISJ))
    assert m == 1
    assert verify_embedding(cert, g) is None


def test_search_single_and_gadget_asymmetry():
    g = expand("z1", AND)
    m_disj, cert = best_projection_embedding(g, SearchConfig(embedded=DISJ))
    assert m_disj == 0 and cert is None
    m_ndisj, cert1 = best_projection_embedding(g, SearchConfig(embedded=NDISJ))
    assert m_ndisj == 1
    assert verify_embedding(cert1, g) is None


def test_search_negated_pair_uses_negated_copies():
    g = expand("!z1", OR)  # AND(!x1, !y1)
    m, cert = best_projection_embedding(g, SearchConfig(embedded=NDISJ))
    assert m == 1
    assert verify_embedding(cert, g) is None


def test_search_size_guards():
    g = expand("z1 & z2 & z3 & z4 & z5", OR)
    with pytest.raises(SizeLimitExceeded):
        best_projection_embedding(g, SearchConfig(max_t=4))
    with pytest.raises(SizeLimitExceeded):
        best_projection_embedding(g, SearchConfig(max_t=5, max_r=5))


def test_search_deterministic():
    g = expand("(z1 | z2) & z3", OR)
    first = best_projection_embedding(g, SearchConfig(embedded=DISJ))
    second = best_projection_embedding(g, SearchConfig(embedded=DISJ))
    assert first == second


@pytest.mark.parametrize("n", [1, 2, 3])
def test_dp_matches_oracle_small(n):
    for t in enum_polarized_trees(n):
        for gadget in (AND, OR):
            g = gadget_expand(t, gadget)
            r = extract(g)
            m0, _ = best_projection_embedding(g, SearchConfig(embedded=DISJ))
            m1, _ = best_projection_embedding(g, SearchConfig(embedded=NDISJ))
            assert (r.m0, r.m1) == (m0, m1), f"{t} {gadget}"


# ---------------------------------------------------------------------------
# log_rank
# ---------------------------------------------------------------------------


def test_log_rank_single_or_gadget():
    assert log_rank(expand("z1", OR)) == 1.0


def test_log_rank_zero_matrix_convention():
    assert matrix_rank_exact([[0, 0], [0, 0]]) == 0
    # log_rank reports 0.0 for rank 0 (cannot arise from a formula).


def test_log_rank_disj2_regression():
    # Frozen: the 4x4 Disjointness-2 matrix has full rank 4 (triangular
    # after reversing rows), so log2 rank = 2.  Cross-checked numerically.
    g = expand("z1 & z2", OR)
    assert log_rank(g) == 2.0
    assert np.linalg.matrix_rank(truth_table(g).astype(float)) == 4


def test_log_rank_invariant_under_renaming():
    a = expand("(z1 | z2) & z3", OR)
    b = expand("(z9 | z5) & z7", OR)
    assert log_rank(a) == log_rank(b)


def test_log_rank_size_guard():
    g = expand(" & ".join(f"z{i}" for i in range(1, 12)), OR)
    with pytest.raises(SizeLimitExceeded):
        log_rank(g)


def fraction_rank(matrix):
    """Reference rank over the rationals via Fraction Gauss elimination."""
    mat = [[Fraction(v) for v in row] for row in matrix]
    if not mat:
        return 0
    m, n = len(mat), len(mat[0])
    rank = 0
    row = 0
    for col in range(n):
        pivot = next((i for i in range(row, m) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        for i in range(row + 1, m):
            factor = mat[i][col] / mat[row][col]
            for j in range(col, n):
                mat[i][j] -= factor * mat[row][j]
        rank += 1
        row += 1
        if row == m:
            break
    return rank


@pytest.mark.parametrize("seed", range(20))
def test_bareiss_matches_fraction_elimination(seed):
    rng = random.Random(seed)
    m = rng.randint(1, 7)
    n = rng.randint(1, 7)
    matrix = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)]
    assert matrix_rank_exact(matrix) == fraction_rank(matrix)


@pytest.mark.parametrize("seed", range(8))
def test_log_rank_matches_numpy_on_01(seed):
    from roembed.cli import GenSpec, generate_formula
    import math

    rng = random.Random(seed)
    t = generate_formula(GenSpec(n_leaves=rng.randint(1, 4), negation_prob=0.3, seed=seed))
    g = gadget_expand(t, rng.choice((AND, OR)))
    exact = 2 ** log_rank(g)
    numeric = np.linalg.matrix_rank(truth_table(g).astype(float))
    assert round(exact) == numeric
