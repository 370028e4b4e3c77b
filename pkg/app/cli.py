"""
The `treepack` command: every service operation as a subcommand.

Results go to stdout (text, or one JSON document with --format json),
diagnostics to stderr. Exit status 0 means success or feasible, 1 a usage or
domain error, 2 a valid but infeasible instance and 3 an exceeded guard.
"""
import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Type

from pydantic import BaseModel, ValidationError

from config import Settings, load_settings
from app.schemas import (
    BipartiteRequest,
    BooleanResponse,
    ClassResponse,
    CountResponse,
    EstimateReportResponse,
    FloatResponse,
    InstanceResponse,
    MatrixRequest,
    OptionalPackingResponse,
    PackingResponse,
    PairAnalysisResponse,
    PairRequest,
    RationalResponse,
    SampleResponse,
    SequenceRequest,
    TreeListResponse,
    TreeResponse,
    TvRequest,
    fraction_text,
    parse_fraction,
)
from app.services.degseq_service import DegreeSequence, classify, is_graphical
from app.services.errors import TreePackError
from app.services.packing_service import (
    MultiInstance,
    PackingResult,
    disjoint_hamiltonian_paths,
    find_disjoint_caterpillars,
    hamiltonian_path_orders,
    kundu_packable,
    pack_caterpillars,
    pack_complementary_leaves,
    pack_multi,
)
from app.services.reduction_service import (
    BipartitePairInstance,
    SimplePairInstance,
    add_dominating_vertex,
    add_pendant_gadget,
    bipartite_to_simple,
    brute_force_bipartite_decision,
    brute_force_disjoint_decision,
    reduce_to_tree_sequence,
    reduction_chain,
)
from app.services.sampling_service import (
    analyze_pair,
    estimate_disjoint_count,
    exact_disjoint_count,
    expected_common_general,
    required_samples,
    sample_disjoint_pair_outcome,
    tv_distance,
)
from app.services.tree_service import (
    count_trees,
    edge_probability,
    list_trees,
    random_tree,
    random_tree_by_leaf_attachment,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class UsageError(Exception):
    """Flags that parse but do not make sense together."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for infeasible instances here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class Outcome:
    payload: BaseModel
    text: str
    status: int = EXIT_OK


# Input

def _read_document(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    return Path(source).read_text()


def _load(args, model: Type[BaseModel], **inline) -> BaseModel:
    """The instance from --input (JSON) or from the inline flags; exactly one source."""
    given = {key: value for key, value in inline.items() if value is not None}
    if args.input is not None:
        if given:
            raise UsageError("Give the instance either with --input or with inline flags, not both")
        return model.model_validate_json(_read_document(args.input))
    return model.model_validate(given)


def _ints(text: Optional[str]) -> Optional[List[int]]:
    return None if text is None else list(DegreeSequence.parse(text).degrees)


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"Cannot parse distribution {text!r}")


def _classes(text: Optional[str]) -> Optional[List[List[int]]]:
    """`1,1;1,1` into the two vertex classes of a bipartite sequence."""
    return None if text is None else [_ints(part) for part in text.split(";")]


def _sequence(args) -> DegreeSequence:
    body = _load(args, SequenceRequest, D=_ints(args.d))
    return DegreeSequence.of(body.d)


def _pair(args) -> Tuple[DegreeSequence, DegreeSequence]:
    body = _load(args, PairRequest, D=_ints(args.d), F=_ints(args.f))
    return DegreeSequence.of(body.d), DegreeSequence.of(body.f)


def _simple(args) -> SimplePairInstance:
    return SimplePairInstance(*_pair(args))


def _bipartite(args) -> BipartitePairInstance:
    body = _load(args, BipartiteRequest, n1=args.n1, n2=args.n2, D=_classes(args.d), F=_classes(args.f))
    if len(body.d) != 2 or len(body.f) != 2:
        raise UsageError("D and F each need exactly two classes separated by ';'")
    return BipartitePairInstance(body.n1, body.n2, (body.d[0], body.d[1]), (body.f[0], body.f[1]))


def _guard(args, default: int) -> int:
    if args.guard_n is not None:
        logger.info(f"Enumeration guard overridden to n <= {args.guard_n}")
        return args.guard_n
    return default


# Output

def _packing_text(result: PackingResult) -> str:
    return "\n\n".join(tree.to_text() for tree in result.trees)


def _instance_text(instance: SimplePairInstance) -> str:
    return f"D={instance.d.to_text()}\nF={instance.f.to_text()}"


def _packing(result: PackingResult) -> Outcome:
    return Outcome(PackingResponse.of(result), _packing_text(result))


def _instance(instance: SimplePairInstance) -> Outcome:
    return Outcome(InstanceResponse.of(instance), _instance_text(instance))


def _decision(answer: bool, yes: str = "true", no: str = "false") -> Outcome:
    return Outcome(
        BooleanResponse(answer=answer, detail=yes if answer else no),
        yes if answer else no,
        EXIT_OK if answer else EXIT_INFEASIBLE,
    )


# Degree sequences

def cmd_graphical(args, cfg: Settings) -> Outcome:
    answer = is_graphical(_sequence(args))
    return Outcome(BooleanResponse(answer=answer), "true" if answer else "false")


def cmd_classify(args, cfg: Settings) -> Outcome:
    value = classify(_sequence(args)).value
    return Outcome(ClassResponse(sequence_class=value), value)


# Trees

def cmd_count_trees(args, cfg: Settings) -> Outcome:
    count = count_trees(_sequence(args))
    return Outcome(CountResponse(count=count), str(count))


def cmd_enum_trees(args, cfg: Settings) -> Outcome:
    trees = list_trees(_sequence(args), guard_n=_guard(args, cfg.guard_n_enumeration))
    payload = TreeListResponse(count=len(trees), trees=[TreeResponse.of(t) for t in trees])
    return Outcome(payload, "\n\n".join(t.to_text() for t in trees))


def cmd_random_tree(args, cfg: Settings) -> Outcome:
    generate = random_tree_by_leaf_attachment if args.method == "attachment" else random_tree
    tree = generate(_sequence(args), args.seed)
    return Outcome(TreeResponse.of(tree), tree.to_text())


def cmd_edge_prob(args, cfg: Settings) -> Outcome:
    value = fraction_text(edge_probability(_sequence(args), args.i, args.j))
    return Outcome(RationalResponse(value=value), value)


# Packing

def cmd_ham_paths(args, cfg: Settings) -> Outcome:
    orders = hamiltonian_path_orders(args.n)
    result = PackingResult(args.n, disjoint_hamiltonian_paths(args.n))
    return Outcome(PackingResponse.of(result), "\n".join(" ".join(map(str, order)) for order in orders))


def cmd_pack_caterpillar(args, cfg: Settings) -> Outcome:
    return _packing(pack_caterpillars(*_pair(args)))


def cmd_caterpillar_search(args, cfg: Settings) -> Outcome:
    guard = args.guard_pairs if args.guard_pairs is not None else cfg.guard_caterpillar_pairs
    found = find_disjoint_caterpillars(*_pair(args), guard_pairs=guard)
    if found is None:
        message = "no disjoint caterpillar realizations"
        return Outcome(OptionalPackingResponse(found=False), message, EXIT_INFEASIBLE)
    return Outcome(OptionalPackingResponse(found=True, packing=PackingResponse.of(found)), _packing_text(found))


def cmd_kundu(args, cfg: Settings) -> Outcome:
    return _decision(kundu_packable(*_pair(args)), yes="packable", no="sum not graphical")


def cmd_pack_leaves(args, cfg: Settings) -> Outcome:
    first, second = _pair(args)
    result = pack_complementary_leaves(
        first,
        second,
        args.seed,
        fallback_factor=cfg.fallback_factor,
        guard_n=_guard(args, cfg.guard_n_enumeration),
    )
    return _packing(result)


def cmd_pack_multi(args, cfg: Settings) -> Outcome:
    body = _load(args, MatrixRequest, rows=[_ints(row) for row in args.row] if args.row else None)
    instance = MultiInstance.of(body.rows)
    result = pack_multi(instance, args.seed, fallback_factor=cfg.fallback_factor)
    return _packing(result)


# Sampling

def cmd_analyze(args, cfg: Settings) -> Outcome:
    analysis = analyze_pair(*_pair(args))
    payload = PairAnalysisResponse.of(analysis)
    text = "\n".join([
        f"A={','.join(map(str, payload.a))}",
        f"B={','.join(map(str, payload.b))}",
        f"expected_common={payload.expected_common}",
        f"p_lower={payload.p_lower}",
    ])
    return Outcome(payload, text)


def cmd_expected_common(args, cfg: Settings) -> Outcome:
    value = fraction_text(expected_common_general(*_pair(args)))
    return Outcome(RationalResponse(value=value), value)


def cmd_samples_needed(args, cfg: Settings) -> Outcome:
    epsilon = args.epsilon if args.epsilon is not None else cfg.epsilon
    delta = args.delta if args.delta is not None else cfg.delta
    count = required_samples(parse_fraction(args.p), epsilon, delta)
    return Outcome(CountResponse(count=count), str(count))


def cmd_estimate(args, cfg: Settings) -> Outcome:
    first, second = _pair(args)
    report = estimate_disjoint_count(
        first,
        second,
        epsilon=args.epsilon if args.epsilon is not None else cfg.epsilon,
        delta=args.delta if args.delta is not None else cfg.delta,
        seed=args.seed,
        workers=args.workers or cfg.workers,
        batch_size=args.batch_size or cfg.batch_size,
    )
    payload = EstimateReportResponse.of(report)
    text = "\n".join(f"{key}={value}" for key, value in payload.model_dump().items())
    return Outcome(payload, text)


def cmd_sample(args, cfg: Settings) -> Outcome:
    first, second = _pair(args)
    epsilon = args.epsilon if args.epsilon is not None else cfg.epsilon
    outcome = sample_disjoint_pair_outcome(first, second, epsilon, args.seed)
    logger.info(f"Sampled after {outcome.attempts} attempts (budget {outcome.budget})")
    result = PackingResult(first.n, outcome.trees)
    return Outcome(SampleResponse.from_outcome(outcome), _packing_text(result))


def cmd_exact_count(args, cfg: Settings) -> Outcome:
    count = exact_disjoint_count(*_pair(args), guard_n=_guard(args, cfg.guard_n_enumeration))
    return Outcome(CountResponse(count=count), str(count))


def cmd_tv(args, cfg: Settings) -> Outcome:
    body = _load(args, TvRequest, p=_floats(args.p), q=_floats(args.q))
    value = tv_distance(body.p, body.q)
    return Outcome(FloatResponse(value=value), repr(value))


# Reductions

def cmd_reduce_bipartite(args, cfg: Settings) -> Outcome:
    return _instance(bipartite_to_simple(_bipartite(args)))


def cmd_reduce_dominate(args, cfg: Settings) -> Outcome:
    return _instance(add_dominating_vertex(_simple(args)))


def cmd_reduce_pendant(args, cfg: Settings) -> Outcome:
    return _instance(add_pendant_gadget(_simple(args)))


def cmd_reduce_tree(args, cfg: Settings) -> Outcome:
    return _instance(reduce_to_tree_sequence(_simple(args)))


def cmd_reduce_chain(args, cfg: Settings) -> Outcome:
    return _instance(reduction_chain(_bipartite(args)))


def cmd_decide_brute(args, cfg: Settings) -> Outcome:
    answer = brute_force_disjoint_decision(
        _simple(args),
        guard_n=_guard(args, cfg.guard_n_brute_force),
        workers=args.workers or cfg.workers,
    )
    return _decision(answer)


def cmd_decide_bipartite(args, cfg: Settings) -> Outcome:
    answer = brute_force_bipartite_decision(_bipartite(args), guard_n=_guard(args, cfg.guard_n_brute_force))
    return _decision(answer)


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treepack", description="Edge-disjoint realizations of tree degree sequences")
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text", help="output format")
    common.add_argument("--config", help="settings file in dotenv format (TREEPACK_* keys)")
    common.add_argument("--input", help="JSON instance file, or - for stdin")

    sequence = _Parser(add_help=False)
    sequence.add_argument("--d", help="degree sequence, e.g. 2,2,1,1")

    pair = _Parser(add_help=False)
    pair.add_argument("--d", help="first degree sequence, e.g. 2,2,1,1")
    pair.add_argument("--f", help="second degree sequence, e.g. 1,1,2,2")

    bipartite = _Parser(add_help=False)
    bipartite.add_argument("--n1", type=int, help="size of the first vertex class")
    bipartite.add_argument("--n2", type=int, help="size of the second vertex class")
    bipartite.add_argument("--d", help="first bipartite sequence, classes split by ';', e.g. 1,1;1,1")
    bipartite.add_argument("--f", help="second bipartite sequence, classes split by ';'")

    seeded = _Parser(add_help=False)
    seeded.add_argument("--seed", type=int, required=True, help="random seed (mandatory)")

    guarded = _Parser(add_help=False)
    guarded.add_argument("--guard-n", type=int, help="override the exhaustive-search size guard")

    def add(name, handler, summary, *parents):
        sub = commands.add_parser(name, parents=[common, *parents], help=summary, description=summary)
        sub.set_defaults(handler=handler)
        return sub

    add("graphical", cmd_graphical, "Erdős–Gallai graphicality test", sequence)
    add("classify", cmd_classify, "not-tree, path, star or other-tree", sequence)

    add("count-trees", cmd_count_trees, "number of labeled trees with these degrees", sequence)
    add("enum-trees", cmd_enum_trees, "every labeled tree with these degrees", sequence, guarded)
    random_tree_parser = add("random-tree", cmd_random_tree, "uniform random tree with these degrees", sequence, seeded)
    random_tree_parser.add_argument("--method", choices=["prufer", "attachment"], default="prufer")
    edge_prob = add("edge-prob", cmd_edge_prob, "probability that a uniform tree contains edge ij", sequence)
    edge_prob.add_argument("--i", type=int, required=True)
    edge_prob.add_argument("--j", type=int, required=True)

    ham_paths = add("ham-paths", cmd_ham_paths, "two edge-disjoint Hamiltonian paths of K_n")
    ham_paths.add_argument("--n", type=int, required=True)
    add("pack-caterpillar", cmd_pack_caterpillar, "disjoint caterpillars for pairs without common leaves", pair)
    search = add("caterpillar-search", cmd_caterpillar_search, "exhaustive disjoint caterpillar search", pair)
    search.add_argument("--guard-pairs", type=int, help="override the caterpillar pair guard")
    add("kundu", cmd_kundu, "decide whether two tree sequences pack", pair)
    add("pack-leaves", cmd_pack_leaves, "disjoint trees when every vertex is a leaf of D or F", pair, seeded, guarded)
    multi = add("pack-multi", cmd_pack_multi, "pairwise disjoint trees for rows with disjoint non-leaves", seeded)
    multi.add_argument("--row", action="append", help="one degree-matrix row; repeat per row")

    add("analyze", cmd_analyze, "leaf partition, expected common edges and p_lower", pair)
    add("expected-common", cmd_expected_common, "expected shared edges of two uniform trees", pair)
    needed = add("samples-needed", cmd_samples_needed, "Chernoff sample size")
    needed.add_argument("--p", required=True, help="success probability lower bound, e.g. 1/4")
    needed.add_argument("--epsilon", type=float)
    needed.add_argument("--delta", type=float)
    estimate = add("estimate", cmd_estimate, "approximate count of disjoint realization pairs", pair, seeded)
    estimate.add_argument("--epsilon", type=float)
    estimate.add_argument("--delta", type=float)
    estimate.add_argument("--workers", type=int)
    estimate.add_argument("--batch-size", type=int)
    sample = add("sample", cmd_sample, "almost uniform disjoint realization pair", pair, seeded)
    sample.add_argument("--epsilon", type=float)
    add("exact-count", cmd_exact_count, "exact number of disjoint realization pairs", pair, guarded)
    tv = add("tv", cmd_tv, "total variation distance of two distributions")
    tv.add_argument("--p", help="comma-separated probabilities")
    tv.add_argument("--q", help="comma-separated probabilities")

    add("reduce-bipartite", cmd_reduce_bipartite, "bipartite pair to a simple pair", bipartite)
    add("reduce-dominate", cmd_reduce_dominate, "add a dominating vertex to D", pair)
    add("reduce-pendant", cmd_reduce_pendant, "add a pendant gadget", pair)
    add("reduce-tree", cmd_reduce_tree, "make D a tree degree sequence", pair)
    add("reduce-chain", cmd_reduce_chain, "bipartite pair to a pair whose D is a tree sequence", bipartite)
    decide = add("decide-brute", cmd_decide_brute, "exhaustive edge-disjoint realization test", pair, guarded)
    decide.add_argument("--workers", type=int)
    add("decide-bipartite", cmd_decide_bipartite, "exhaustive bipartite realization test", bipartite, guarded)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.config and not Path(args.config).is_file():
        print(f"treepack {args.command}: config file {args.config} not found", file=sys.stderr)
        return EXIT_ERROR
    try:
        cfg = load_settings(args.config)
    except ValidationError as e:
        print(f"treepack {args.command}: invalid settings: {e}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(stream=sys.stderr, level=cfg.log_level, format="%(levelname)s %(name)s: %(message)s")

    try:
        outcome = args.handler(args, cfg)
    except TreePackError as e:
        logger.debug(f"{type(e).__name__} in {args.command}")
        print(f"treepack {args.command}: {e.message}", file=sys.stderr)
        return e.exit_code
    except (ValidationError, UsageError, OSError, ValueError) as e:
        print(f"treepack {args.command}: {e}", file=sys.stderr)
        return EXIT_ERROR

    if args.format == "json":
        print(outcome.payload.model_dump_json(by_alias=True))
    else:
        print(outcome.text)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
