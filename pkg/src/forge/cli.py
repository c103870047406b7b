"""The `forge` command line: thin sequential orchestration over the library
modules, structured-text reports with a stable field order, and the exit-code
contract 0 = certified/witness, 2 = inconclusive, 1 = error (refuted
certification checks also exit 1).

No report ever claims that a group has no nontrivial finite quotient; an
exhausted search is always reported as inconclusive.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from dataclasses import dataclass, field

from . import fileformats as FF
from . import words as W
from .encoder import encode, encode_discrete, revalidate_certificate
from .errors import ForgeError
from .presentations import abelianization, free_power
from .quotients import (OrderSpec, SearchBudget, _Budget, _BudgetStop,
                        _enumerate_homs, _restore_assignment, _transfer_word,
                        cycle_notation, has_nontrivial_quotient_upto,
                        identity_perm, simplify_presentation,
                        verify_order_spec)
from .squarecx import (build_S_of_P, check_link_condition, pi1_presentation)
from .stallings import core, fibre_product, fold, malnormal_family_check

EXIT_CODES = {"certified": 0, "witness": 0, "refuted": 1, "inconclusive": 2,
              "error": 1}


@dataclass
class RunReport:
    """One run's outcome.  Fields print in a fixed order so reports diff
    cleanly; inputs are content hashes, never raw paths."""

    command: str
    inputs: dict
    status: str
    timing: float = 0.0
    artifacts: list = field(default_factory=list)
    details: list = field(default_factory=list)

    def __post_init__(self):
        if self.status not in EXIT_CODES:
            raise ValueError(f"unknown status {self.status!r}")

    def exit_code(self):
        return EXIT_CODES[self.status]

    def to_text(self):
        out = [f"command: {self.command}", f"status: {self.status}"]
        for label in sorted(self.inputs):
            out.append(f"input {label}: sha256:{self.inputs[label]}")
        out.append(f"timing: {self.timing:.3f}s")
        for path in self.artifacts:
            out.append(f"artifact: {path}")
        for key, value in self.details:
            out.append(f"{key}: {value}")
        return "\n".join(out) + "\n"


def _digest(data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text, out_path, artifacts):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        artifacts.append(out_path)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# End-to-end pipeline.


def run_encode_and_probe(p, w, budget, N=7, max_candidates=64):
    """Encode (p, w) and search the output presentation for a nontrivial
    finite quotient.  A witness certifies the output group has a nontrivial
    finite quotient; an exhausted search decides nothing."""
    start = time.monotonic()
    inputs = {"presentation": _digest(FF.format_presentation(p)),
              "word": _digest(W.format_word(w))}
    trace = encode(p, w, N=N, max_candidates=max_candidates)
    outcome = has_nontrivial_quotient_upto(trace.p_w, budget)
    details = [
        ("output generators", str(len(trace.p_w.generators))),
        ("output relators", str(len(trace.p_w.relators))),
        ("degrees searched", f"2..{outcome.max_degree_searched}"),
        ("nodes", str(outcome.nodes)),
    ]
    if outcome.status == "witness":
        status = "witness"
        details.append(("witness", outcome.witness.describe()))
        details.append(("conclusion",
                        "a finite quotient with nontrivial image exists"))
    else:
        status = "inconclusive"
        details.append(("conclusion",
                        "search exhausted within budget; no conclusion"))
    return RunReport("probe", inputs, status,
                     timing=time.monotonic() - start, details=details)


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns a RunReport.


def _load_graph_file(path, folded):
    graph, base_path, vmap = FF.parse_graph_file(_read(path))
    if base_path is None:
        raise ForgeError(f"{path}: graph file has no base line")
    import os
    full = os.path.join(os.path.dirname(os.path.abspath(path)), base_path)
    base = FF.parse_base_graph(_read(full))
    return FF.resolve_immersion(graph, base, vmap, folded=folded), base_path


def _cmd_fold(args):
    imm, base_path = _load_graph_file(args.graph, folded=False)
    folded = fold(imm)
    artifacts = []
    _emit(FF.format_immersion(folded, base_path), args.out, artifacts)
    details = [("vertices", str(len(folded.domain.vertices))),
               ("edges", str(len(folded.domain.edges)))]
    return RunReport("fold", {"graph": _digest(_read(args.graph))},
                     "certified", artifacts=artifacts, details=details)


def _cmd_core(args):
    imm, base_path = _load_graph_file(args.graph, folded=False)
    trimmed = core(fold(imm))
    artifacts = []
    _emit(FF.format_immersion(trimmed, base_path), args.out, artifacts)
    details = [("vertices", str(len(trimmed.domain.vertices))),
               ("edges", str(len(trimmed.domain.edges)))]
    return RunReport("core", {"graph": _digest(_read(args.graph))},
                     "certified", artifacts=artifacts, details=details)


def _component_details(decomp):
    details = [("components", str(len(decomp.components)))]
    for c in decomp.components:
        details.append((f"component {c.index}",
                        f"vertices={len(c.vertices)} edges={c.edge_count} "
                        f"rank={c.rank} tree={c.is_tree} diagonal={c.is_diagonal}"))
    return details


def _cmd_fibre(args):
    i1, _ = _load_graph_file(args.graph1, folded=True)
    i2, _ = _load_graph_file(args.graph2, folded=True)
    decomp = fibre_product(i1, i2)
    inputs = {"graph1": _digest(_read(args.graph1)),
              "graph2": _digest(_read(args.graph2))}
    return RunReport("fibre", inputs, "certified",
                     details=_component_details(decomp))


def _cmd_malnormal(args):
    family = []
    inputs = {}
    for k, path in enumerate(args.graphs):
        imm, _ = _load_graph_file(path, folded=True)
        family.append(imm)
        inputs[f"graph{k}"] = _digest(_read(path))
    ok, witness = malnormal_family_check(family)
    if ok:
        return RunReport("malnormal", inputs, "certified",
                         details=[("family size", str(len(family)))])
    c = witness.component
    details = [("witness pair", f"{witness.pair[0]},{witness.pair[1]}"),
               ("witness component",
                f"vertices={len(c.vertices)} edges={c.edge_count} rank={c.rank}")]
    return RunReport("malnormal", inputs, "refuted", details=details)


def _cmd_abel(args):
    p = FF.parse_presentation(_read(args.presentation))
    inv = abelianization(p)
    details = [("betti", str(inv.betti)),
               ("torsion", " ".join(map(str, inv.torsion)) or "none")]
    return RunReport("abel", {"presentation": _digest(_read(args.presentation))},
                     "certified", details=details)


def _cmd_freepow(args):
    p = FF.parse_presentation(_read(args.presentation))
    q = free_power(p, args.n)
    artifacts = []
    _emit(FF.format_presentation(q), args.out, artifacts)
    details = [("generators", str(len(q.generators))),
               ("relators", str(len(q.relators)))]
    return RunReport("freepow", {"presentation": _digest(_read(args.presentation)),
                                 "n": _digest(str(args.n))},
                     "certified", artifacts=artifacts, details=details)


def _cmd_encode(args):
    p = FF.parse_presentation(_read(args.presentation))
    w = W.parse_word(p.alphabet, args.word)
    inputs = {"presentation": _digest(_read(args.presentation)),
              "word": _digest(args.word)}
    details = []
    if args.discrete:
        from .encoder import EncodingTrace
        p_w = encode_discrete(p, w)
        trace = EncodingTrace(p, w, modulus=0,
                              short_circuited=w.is_identity(), p_w=p_w)
        trace.abelianizations = {"input": abelianization(p),
                                 "p_w": abelianization(p_w)}
    else:
        trace = encode(p, w, N=args.N, max_candidates=args.budget)
        if trace.certificate is not None:
            if not revalidate_certificate(trace.certificate):
                raise ForgeError("certificate failed revalidation")
            details.append(("certificate", "revalidated"))
    for name, stage in trace.stages().items():
        details.append((f"stage {name}",
                        f"generators={len(stage.generators)} "
                        f"relators={len(stage.relators)}"))
    artifacts = []
    _emit(FF.trace_to_json(trace), args.out, artifacts)
    return RunReport("encode", inputs, "certified",
                     artifacts=artifacts, details=details)


def _parse_orders(text):
    try:
        kappa_text, exp_text = text.split(":", 1)
        kappa = int(kappa_text)
        exponents = tuple(int(e) for e in exp_text.split(","))
    except ValueError as exc:
        raise ForgeError(f"bad --orders spec {text!r}; expected k:e1,e2,...") from exc
    return kappa, exponents


def _cmd_quotients(args):
    p = FF.parse_presentation(_read(args.presentation))
    inputs = {"presentation": _digest(_read(args.presentation))}
    details = []

    spec = None
    if args.orders:
        kappa, exponents = _parse_orders(args.orders)
        targets = tuple(p.alphabet.gen(g) for g in p.generators)
        if len(exponents) != len(targets):
            raise ForgeError(f"--orders gives {len(exponents)} exponents for "
                             f"{len(targets)} generators")
        spec = OrderSpec(targets=targets, kappa=kappa, exponents=exponents)
        inputs["orders"] = _digest(args.orders)
        search_p, word = p, None
    elif args.word:
        inputs["word"] = _digest(args.word)
        simp = simplify_presentation(p)
        search_p = simp.presentation
        word = _transfer_word(simp, W.parse_word(p.alphabet, args.word))
    else:
        simp = simplify_presentation(p)
        search_p = simp.presentation
        word = None

    witness = None
    witness_degree = None
    for n in range(2, args.max_degree + 1):
        tracker = _Budget(SearchBudget(max_degree=n, max_nodes=args.max_nodes))
        found = None
        try:
            for q in _enumerate_homs(search_p, n, tracker, reduce_first=True):
                if spec is not None:
                    ok, _ = verify_order_spec(q, spec)
                    if ok:
                        found = q
                        break
                elif word is not None:
                    if q.evaluate(word) != identity_perm(n):
                        found = _restore_assignment(p, simp, q)
                        break
                else:
                    full = _restore_assignment(p, simp, q)
                    if not full.is_trivial():
                        found = full
                        break
        except _BudgetStop:
            details.append((f"degree {n}", f"nodes={tracker.nodes} (budget hit)"))
            break
        details.append((f"degree {n}", f"nodes={tracker.nodes}"))
        if found is not None:
            witness, witness_degree = found, n
            break

    if witness is not None:
        details.append(("witness degree", str(witness_degree)))
        for g in sorted(witness.images):
            details.append((f"witness {g}", cycle_notation(witness.images[g])))
        return RunReport("quotients", inputs, "witness", details=details)
    details.append(("conclusion", "search exhausted within budget; no conclusion"))
    return RunReport("quotients", inputs, "inconclusive", details=details)


def _cmd_sqc_check(args):
    cx = FF.parse_complex(_read(args.complex))
    ok, violations = check_link_condition(cx)
    inputs = {"complex": _digest(_read(args.complex))}
    details = [("vertices", str(len(cx.vertices))),
               ("edges", str(len(cx.edges))),
               ("squares", str(len(cx.squares))),
               ("euler characteristic", str(cx.euler_characteristic()))]
    if ok:
        return RunReport("sqc check", inputs, "certified", details=details)
    details.append(("violations", str(len(violations))))
    for v, kind, _ in violations[:5]:
        details.append(("violation", f"{kind} in link of {v!r}"))
    return RunReport("sqc check", inputs, "refuted", details=details)


def _parse_gamma(text, cx):
    gamma = []
    for tok in text.split():
        if tok.endswith("-"):
            eid, sign = FF._token(tok[:-1]), -1
        else:
            eid, sign = FF._token(tok), 1
        if eid not in cx.edges:
            raise ForgeError(f"gamma references unknown edge {tok!r}")
        gamma.append((eid, sign))
    return gamma


def _cmd_sqc_build(args):
    p = FF.parse_presentation(_read(args.pres))
    cx = FF.parse_complex(_read(args.complex))
    gamma = _parse_gamma(args.gamma, cx)
    built = build_S_of_P(p, cx, gamma)
    artifacts = []
    _emit(FF.format_complex(built.complex), args.out, artifacts)
    inputs = {"presentation": _digest(_read(args.pres)),
              "complex": _digest(_read(args.complex)),
              "gamma": _digest(args.gamma)}
    s = built.complex
    details = [("vertices", str(len(s.vertices))),
               ("edges", str(len(s.edges))),
               ("squares", str(len(s.squares))),
               ("euler characteristic", str(s.euler_characteristic()))]
    return RunReport("sqc build", inputs, "certified",
                     artifacts=artifacts, details=details)


def _cmd_sqc_pi1(args):
    cx = FF.parse_complex(_read(args.complex))
    p = pi1_presentation(cx)
    artifacts = []
    _emit(FF.format_presentation(p), args.out, artifacts)
    inv = abelianization(p)
    details = [("generators", str(len(p.generators))),
               ("relators", str(len(p.relators))),
               ("betti", str(inv.betti)),
               ("torsion", " ".join(map(str, inv.torsion)) or "none")]
    return RunReport("sqc pi1", {"complex": _digest(_read(args.complex))},
                     "certified", artifacts=artifacts, details=details)


def _cmd_probe(args):
    p = FF.parse_presentation(_read(args.presentation))
    w = W.parse_word(p.alphabet, args.word)
    budget = SearchBudget(max_degree=args.max_degree, max_nodes=args.max_nodes)
    return run_encode_and_probe(p, w, budget, N=args.N,
                                max_candidates=args.budget)


# ---------------------------------------------------------------------------
# Argument parsing.


def build_parser():
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Subgroup graphs, presentations, quotient searches and "
                    "the encoding pipeline.")
    parser.add_argument("--jobs", type=int, default=1,
                        help="cap on internal workers (the orchestrator itself "
                             "is sequential)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("fold", help="fold a graph morphism to an immersion")
    s.add_argument("graph")
    s.add_argument("--out")
    s.set_defaults(handler=_cmd_fold)

    s = sub.add_parser("core", help="fold and trim to the core graph")
    s.add_argument("graph")
    s.add_argument("--out")
    s.set_defaults(handler=_cmd_core)

    s = sub.add_parser("fibre", help="fibre product of two immersions")
    s.add_argument("graph1")
    s.add_argument("graph2")
    s.set_defaults(handler=_cmd_fibre)

    s = sub.add_parser("malnormal", help="certify a family of immersions malnormal")
    s.add_argument("graphs", nargs="+")
    s.set_defaults(handler=_cmd_malnormal)

    s = sub.add_parser("abel", help="abelian invariants of a presentation")
    s.add_argument("presentation")
    s.set_defaults(handler=_cmd_abel)

    s = sub.add_parser("freepow", help="n-fold free power of a presentation")
    s.add_argument("presentation")
    s.add_argument("n", type=int)
    s.add_argument("--out")
    s.set_defaults(handler=_cmd_freepow)

    s = sub.add_parser("encode", help="run the encoding pipeline")
    s.add_argument("presentation")
    s.add_argument("--word", required=True)
    s.add_argument("--N", type=int, default=7)
    s.add_argument("--budget", type=int, default=64,
                   help="candidate budget for the malnormal tuple search")
    s.add_argument("--discrete", action="store_true")
    s.add_argument("--out")
    s.set_defaults(handler=_cmd_encode)

    s = sub.add_parser("quotients", help="search finite symmetric quotients")
    s.add_argument("presentation")
    s.add_argument("--max-degree", type=int, required=True)
    s.add_argument("--word")
    s.add_argument("--orders", help="k:e1,e2,... target orders for the generators")
    s.add_argument("--max-nodes", type=int, default=10 ** 7)
    s.set_defaults(handler=_cmd_quotients)

    s = sub.add_parser("sqc", help="square complex tools")
    sqc = s.add_subparsers(dest="sqc_command", required=True)

    t = sqc.add_parser("check", help="link condition check")
    t.add_argument("complex")
    t.set_defaults(handler=_cmd_sqc_check)

    t = sqc.add_parser("build", help="build the scaled-copy complex of a presentation")
    t.add_argument("--pres", required=True)
    t.add_argument("--complex", required=True)
    t.add_argument("--gamma", required=True,
                   help="directed edge list, e.g. 'a b-' (minus for reverse)")
    t.add_argument("--out")
    t.set_defaults(handler=_cmd_sqc_build)

    t = sqc.add_parser("pi1", help="fundamental group presentation")
    t.add_argument("complex")
    t.add_argument("--out")
    t.set_defaults(handler=_cmd_sqc_pi1)

    s = sub.add_parser("probe", help="encode then search the output for a "
                                     "nontrivial finite quotient")
    s.add_argument("presentation")
    s.add_argument("--word", required=True)
    s.add_argument("--max-degree", type=int, default=5)
    s.add_argument("--max-nodes", type=int, default=10 ** 7)
    s.add_argument("--N", type=int, default=7)
    s.add_argument("--budget", type=int, default=64)
    s.set_defaults(handler=_cmd_probe)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    start = time.monotonic()
    try:
        report = args.handler(args)
    except (ForgeError, OSError, ValueError) as exc:
        report = RunReport(args.subcommand, {}, "error",
                           timing=time.monotonic() - start,
                           details=[("error", str(exc))])
    if report.timing == 0.0:
        report.timing = time.monotonic() - start
    sys.stdout.write(report.to_text())
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
