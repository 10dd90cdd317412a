"""Command-line front end.

Subcommands: ``canon``, ``embed``, ``verify``, ``gen`` and
``oracle {equiv,search,rank}``.  Formulas are read from ``-f FILE`` or
stdin; reports go to stdout as JSON, diagnostics to stderr.

Exit codes: 0 success (for ``embed``: every asserted guarantee held; for
``verify``: certificate verified), 1 bad input (syntax, read-once,
malformed certificates, failed preconditions), 2 a guarantee assertion
failed or a counterexample was found, 3 a size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from .errors import (
    DegenerateConstant,
    FormulaSyntaxError,
    LengthMismatch,
    MalformedCertificate,
    MissingVariable,
    PreconditionFailed,
    ReadOnceViolation,
    RoembedError,
    SizeLimitExceeded,
    VerificationFailed,
)
from .extractor import lemma_pipeline, theorem_pipeline, uniform_leaf_parent_kind
from .formula import (
    AND,
    OR,
    CanonicalTree,
    Formula,
    Gate,
    Leaf,
    Not,
    canonicalize,
    dual,
    parse,
    to_dot,
    to_json,
    to_text,
)
from .oracle import SearchConfig, best_projection_embedding, equiv_check, log_rank
from .two_party import cert_from_json, cert_to_obj, gadget_expand, verify_embedding

_INPUT_ERRORS = (
    FormulaSyntaxError,
    ReadOnceViolation,
    DegenerateConstant,
    MissingVariable,
    LengthMismatch,
    MalformedCertificate,
    PreconditionFailed,
    ValueError,
    OSError,
)


# ---------------------------------------------------------------------------
# Random formula generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenSpec:
    """Shape parameters for seeded random canonical formulas."""

    n_leaves: int
    root_gate: str = "random"  # "AND", "OR" or "random"
    max_fanin: int = 4
    negation_prob: float = 0.0
    seed: int = 0


def generate_formula(spec: GenSpec) -> CanonicalTree:
    """Deterministic random canonical tree with exactly ``n_leaves`` leaves."""
    if spec.n_leaves < 1:
        raise ValueError("n_leaves must be at least 1")
    if spec.max_fanin < 2:
        raise ValueError("max_fanin must be at least 2")
    if not 0.0 <= spec.negation_prob <= 1.0:
        raise ValueError("negation_prob must be in [0, 1]")
    if spec.root_gate not in ("AND", "OR", "random"):
        raise ValueError(f"root_gate must be AND, OR or random, got {spec.root_gate!r}")
    rng = random.Random(spec.seed)
    counter = iter(range(1, spec.n_leaves + 1))

    def leaf():
        node = Leaf(f"z{next(counter)}")
        return Not(node) if rng.random() < spec.negation_prob else node

    def build(n: int, kind: str):
        if n == 1:
            return leaf()
        fanin = rng.randint(2, min(spec.max_fanin, n))
        cuts = sorted(rng.sample(range(1, n), fanin - 1))
        sizes = [b - a for a, b in zip([0] + cuts, cuts + [n])]
        return Gate(kind, tuple(build(size, dual(kind)) for size in sizes))

    if spec.root_gate == "random":
        root_kind = rng.choice((AND, OR))
    else:
        root_kind = spec.root_gate
    return canonicalize(Formula(build(spec.n_leaves, root_kind)))


# ---------------------------------------------------------------------------
# Command helpers
# ---------------------------------------------------------------------------


def _read_formula(args) -> CanonicalTree:
    if getattr(args, "file", None):
        with open(args.file, "r", encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = sys.stdin.read()
    return canonicalize(parse(text))


def _pipeline_gadget(t: CanonicalTree) -> str:
    kind = uniform_leaf_parent_kind(t)
    if kind is None:
        raise PreconditionFailed(
            "leaf parents are not uniformly one gate kind; cannot pick a gadget"
        )
    return OR if kind == AND else AND


def _cmd_canon(args) -> int:
    tree = _read_formula(args)
    print(to_dot(tree) if args.dot else to_json(tree))
    return 0


def _cmd_embed(args) -> int:
    tree = _read_formula(args)
    if args.pipeline == "lemma":
        if args.gadget != "auto":
            chosen = _pipeline_gadget(tree)
            if args.gadget.upper() != chosen:
                raise PreconditionFailed(
                    f"--gadget {args.gadget} conflicts with the case split's {chosen}"
                )
        result = lemma_pipeline(tree, strict_verify=args.strict_verify)
        obj = result.to_obj()
        ok = result.guarantee_met
    else:
        report = theorem_pipeline(tree, strict_verify=args.strict_verify)
        if args.gadget != "auto" and args.gadget.upper() != report.gadget:
            raise PreconditionFailed(
                f"--gadget {args.gadget} conflicts with the pipeline's {report.gadget}"
            )
        obj = report.to_obj()
        ok = report.result.guarantee_met
    print(json.dumps(obj))
    if not ok:
        print("guarantee assertion failed; see report", file=sys.stderr)
        return 2
    return 0


def _cmd_verify(args) -> int:
    with open(args.cert, "r", encoding="utf-8") as handle:
        cert = cert_from_json(handle.read())
    if args.file or args.use_stdin:
        tree = _read_formula(args)
    elif cert.target_formula is not None:
        tree = canonicalize(parse(cert.target_formula))
    else:
        raise MalformedCertificate(
            "certificate has no target formula; pass one with -f"
        )
    if cert.gadget is None:
        raise MalformedCertificate("certificate does not name its gadget")
    gadget_tree = gadget_expand(tree, cert.gadget)
    counterexample = verify_embedding(cert, gadget_tree)
    if counterexample is None:
        print("verified")
        return 0
    print(f"counterexample: x={counterexample.x} y={counterexample.y}")
    return 2


def _cmd_gen(args) -> int:
    spec = GenSpec(
        n_leaves=args.n_leaves,
        root_gate=args.root_gate.upper() if args.root_gate != "random" else "random",
        max_fanin=args.max_fanin,
        negation_prob=args.negation_prob,
        seed=args.seed,
    )
    print(to_text(generate_formula(spec)))
    return 0


def _cmd_oracle_equiv(args) -> int:
    counterexample = equiv_check(parse(args.first), parse(args.second))
    if counterexample is None:
        print("equal")
        return 0
    print("counterexample: " + json.dumps(counterexample, sort_keys=True))
    return 2


def _cmd_oracle_search(args) -> int:
    tree = _read_formula(args)
    g = gadget_expand(tree, args.gadget.upper())
    cfg = SearchConfig(max_t=args.max_t, max_r=args.max_r, embedded=args.embedded.upper())
    m_star, cert = best_projection_embedding(g, cfg)
    print(json.dumps({"m_star": m_star, "cert": cert_to_obj(cert) if cert else None}))
    return 0


def _cmd_oracle_rank(args) -> int:
    tree = _read_formula(args)
    g = gadget_expand(tree, args.gadget.upper())
    print(json.dumps({"log_rank": log_rank(g)}))
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def _add_formula_input(sub) -> None:
    sub.add_argument("-f", "--file", help="read the formula from FILE instead of stdin")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roembed",
        description="Canonicalize read-once formulas and build embedding certificates.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    canon = commands.add_parser("canon", help="print the canonical tree")
    _add_formula_input(canon)
    fmt = canon.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--dot", action="store_true", help="Graphviz DOT output")
    canon.set_defaults(func=_cmd_canon)

    embed = commands.add_parser("embed", help="run an embedding pipeline")
    _add_formula_input(embed)
    embed.add_argument("--gadget", choices=["or", "and", "auto"], default="auto")
    embed.add_argument("--pipeline", choices=["lemma", "theorem"], default="theorem")
    embed.add_argument(
        "--strict-verify",
        action="store_true",
        help="refuse (exit 3) instead of falling back to structural checking "
        "when a certificate exceeds the exhaustive-verification cap",
    )
    embed.set_defaults(func=_cmd_embed)

    verify = commands.add_parser("verify", help="check a certificate file")
    verify.add_argument("cert", help="certificate JSON file")
    _add_formula_input(verify)
    verify.add_argument(
        "--use-stdin", action="store_true", help="read the target formula from stdin"
    )
    verify.set_defaults(func=_cmd_verify)

    gen = commands.add_parser("gen", help="emit a seeded random formula")
    gen.add_argument("--n-leaves", type=int, required=True)
    gen.add_argument("--root-gate", choices=["and", "or", "random"], default="random")
    gen.add_argument("--max-fanin", type=int, default=4)
    gen.add_argument("--negation-prob", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=_cmd_gen)

    oracle = commands.add_parser("oracle", help="brute-force ground-truth tools")
    oracle_sub = oracle.add_subparsers(dest="oracle_command", required=True)

    equiv = oracle_sub.add_parser("equiv", help="exhaustive equivalence of two formulas")
    equiv.add_argument("first")
    equiv.add_argument("second")
    equiv.set_defaults(func=_cmd_oracle_equiv)

    search = oracle_sub.add_parser("search", help="optimal projection embedding")
    _add_formula_input(search)
    search.add_argument("--gadget", choices=["or", "and"], required=True)
    search.add_argument("--embedded", choices=["disj", "ndisj"], default="disj")
    search.add_argument("--max-t", type=int, default=4)
    search.add_argument("--max-r", type=int, default=4)
    search.set_defaults(func=_cmd_oracle_search)

    rank = oracle_sub.add_parser("rank", help="exact log2 rank of the gadget table")
    _add_formula_input(rank)
    rank.add_argument("--gadget", choices=["or", "and"], required=True)
    rank.set_defaults(func=_cmd_oracle_rank)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SizeLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except VerificationFailed as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RoembedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
