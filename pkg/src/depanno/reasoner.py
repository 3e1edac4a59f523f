"""Annotation reasoning: path semantics, model enumeration, consistency.

A complete assignment gives every upstream (input, output) pair exactly one
of the five dependency types. An assignment is an answer set when, for every
pair, the assigned type equals the pair's strongest path type: each simple
dataflow path from the input edge to the output edge carries the weakest
direct (same-block) type found along it, and the pair's type is the
strongest such value over all of its paths. User annotations pin their pairs
in every answer set; a NotFlowsFrom assertion is satisfiable only on a pair
with no dataflow path at all.

Only the direct pairs are free variables. Every multi-block pair's value is
a consequence of the direct choices, so the search walks direct assignments,
derives the rest, and checks user pins. ``brute_force_solve`` ignores that
structure on purpose: it enumerates raw assignments over all upstream pairs
and tests the two path constraints literally, which makes it a slow,
independent oracle for the optimized search.

Strongest-path values are computed with a widest-path (maximize the minimum)
variant of Dijkstra over the edge-label graph. Dropping a cycle from a walk
never lowers the walk's minimum, so the walk optimum equals the simple-path
optimum and the computation is safe on cyclic workflows.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .model import (
    Annotation,
    AssertionType,
    DependencyType,
    NOT_FLOWS_FROM,
    ReachabilityAssertion,
    StructuralValidationError,
    UnknownLabelError,
    WorkflowSpec,
    _SpecIndex,
    up_stream_pairs,
    validate_structure,
)

Pair = tuple[str, str]

# Model cap while searching for a conflict explanation; only reason quality
# depends on it, never correctness of the consistency verdict.
_EXPLAIN_CAP = 1024


class ConflictReason(enum.Enum):
    NOT_A_VALID_PATH_TYPE = "not-a-valid-path-type"
    STRONGER_PATH_EXISTS = "stronger-path-exists"
    REACHABLE_BUT_NOT_FLOWS_FROM = "reachable-but-notflowsfrom"


@dataclass(frozen=True)
class WitnessPath:
    """One dataflow path plus the path types it can still take.

    ``achievable`` holds the values the path's minimum can reach given the
    user's direct-pair pins: a single value when every hop is pinned,
    otherwise everything up to the pinned cap.
    """

    labels: tuple[str, ...]
    achievable: tuple[DependencyType, ...]


@dataclass(frozen=True)
class Conflict:
    """Why one user annotation cannot hold, with witness paths."""

    pair: Pair
    asserted: AssertionType
    witnesses: tuple[WitnessPath, ...]
    reason: ConflictReason


@dataclass(frozen=True)
class PairReport:
    """Per-pair inference outcome: entailed value, options, and origin."""

    entailed: Optional[DependencyType]
    options: tuple[DependencyType, ...]
    origin: str


@dataclass(frozen=True)
class SolveResult:
    """Enumerated answer sets plus their per-pair projection.

    ``answer_sets`` are sorted canonically: pairs ordered lexicographically,
    sets compared by the tuple of type ranks over that pair order.
    ``options`` maps each upstream pair to the sorted distinct values it
    takes across the returned sets; ``entailed`` keeps the singletons.
    ``truncated`` is set when enumeration stopped at the model cap, in which
    case options may be incomplete.
    """

    answer_sets: tuple[dict, ...]
    entailed: dict
    options: dict
    truncated: bool

    @property
    def consistent(self) -> bool:
        return bool(self.answer_sets)


class InconsistentWorkflowError(ValueError):
    """Raised by infer when no answer set extends the user annotations."""

    def __init__(self, conflicts: Iterable[Conflict]):
        self.conflicts = tuple(conflicts)
        parts = []
        for c in self.conflicts:
            name = c.asserted.display
            parts.append(f"{c.pair[0]} -> {c.pair[1]} ({name}): {c.reason.value}")
        detail = "; ".join(parts) or "no answer set"
        super().__init__(f"annotations are inconsistent: {detail}")


class BruteForceCapError(ValueError):
    """The workflow has more upstream pairs than the brute-force cap allows."""


class MissingDirectTypeError(LookupError):
    """A direct pair between the endpoints has no assigned type."""

    def __init__(self, pair: Pair):
        super().__init__(f"no dependency type for direct pair {pair[0]!r} -> {pair[1]!r}")
        self.pair = pair


def _require_label(index: _SpecIndex, label: str) -> None:
    if label not in index.by_label:
        raise UnknownLabelError(label)


def _simple_paths(index: _SpecIndex, input_label: str, output_label: str):
    """All simple paths as alternating in/out label tuples, sorted."""
    if index.by_label[input_label].direction != "in":
        return []
    if index.by_label[output_label].direction != "out":
        return []
    paths: list[tuple[str, ...]] = []
    path = [input_label]
    used = {input_label}

    def walk(in_label: str) -> None:
        program = index.by_label[in_label].program
        for out in index.block_outs.get(program, ()):
            if out in used:
                continue
            path.append(out)
            used.add(out)
            if out == output_label:
                paths.append(tuple(path))
            else:
                for nxt in index.ins_of_out(out):
                    if nxt in used:
                        continue
                    path.append(nxt)
                    used.add(nxt)
                    walk(nxt)
                    path.pop()
                    used.discard(nxt)
            path.pop()
            used.discard(out)

    walk(input_label)
    return sorted(paths)


def simple_paths(input_label: str, output_label: str, spec: WorkflowSpec):
    """Enumerate simple dataflow paths from an input edge to an output edge.

    A path alternates in and out labels, starts at ``input_label``, ends at
    ``output_label``, and never repeats a label. Returns a sorted list of
    label tuples, empty when the pair is unreachable. Raises
    UnknownLabelError for labels not in the workflow.
    """
    index = _SpecIndex(spec)
    _require_label(index, input_label)
    _require_label(index, output_label)
    return _simple_paths(index, input_label, output_label)


def _path_hops(path: tuple[str, ...]) -> tuple[Pair, ...]:
    """Direct pairs along a path: consecutive (in, out) labels per block."""
    return tuple((path[k], path[k + 1]) for k in range(0, len(path) - 1, 2))


def _rank_map(direct: Mapping[Pair, DependencyType]) -> dict[Pair, int]:
    return {pair: int(DependencyType(t)) for pair, t in direct.items()}


def _widest(index: _SpecIndex, start: str, ranks: Mapping[Pair, int]) -> dict[str, int]:
    """Best bottleneck rank from one in-label to every reachable label.

    In-to-out hops inside a block bottleneck on the direct pair's rank;
    out-to-in hops through a data block carry the value unchanged. Direct
    pairs missing from ``ranks`` are treated as absent hops.
    """
    best = {start: 5}
    heap = [(-5, start)]
    while heap:
        negw, label = heapq.heappop(heap)
        width = -negw
        if width < best.get(label, -1):
            continue
        edge = index.by_label[label]
        if edge.direction == "in":
            for out in index.block_outs.get(edge.program, ()):
                rank = ranks.get((label, out))
                if rank is None:
                    continue
                value = min(width, rank)
                if value > best.get(out, -1):
                    best[out] = value
                    heapq.heappush(heap, (-value, out))
        else:
            for nxt in index.ins_of_out(label):
                if width > best.get(nxt, -1):
                    best[nxt] = width
                    heapq.heappush(heap, (-width, nxt))
    return best


def path_type(
    input_label: str,
    output_label: str,
    direct: Mapping[Pair, DependencyType],
    spec: WorkflowSpec,
) -> Optional[DependencyType]:
    """Strongest path type for one pair under the given direct assignments.

    Each simple path carries the weakest direct type along it and the result
    is the strongest value over all paths, or None when no path joins the
    pair. Raises UnknownLabelError for unknown labels and
    MissingDirectTypeError when a direct pair lying between the endpoints
    has no entry in ``direct``.
    """
    index = _SpecIndex(spec)
    _require_label(index, input_label)
    _require_label(index, output_label)
    if index.by_label[input_label].direction != "in":
        return None
    if index.by_label[output_label].direction != "out":
        return None
    ranks = _rank_map(direct)
    forward = index.reachable_ins(input_label)
    backward = index.reaching_outs(output_label)
    for pair in index.direct_pairs:
        if pair[0] in forward and pair[1] in backward and pair not in ranks:
            raise MissingDirectTypeError(pair)
    width = _widest(index, input_label, ranks).get(output_label)
    return None if width is None else DependencyType(width)


class _Reasoning:
    """Per-spec solver context: adjacency, upstream pairs, path cache."""

    def __init__(self, spec: WorkflowSpec):
        self.spec = spec
        self.index = _SpecIndex(spec)
        self.upstream: tuple[Pair, ...] = tuple(sorted(up_stream_pairs(spec)))
        self.upstream_set = set(self.upstream)
        self.direct: tuple[Pair, ...] = self.index.direct_pairs
        self.direct_set = set(self.direct)
        self.sources: tuple[str, ...] = tuple(sorted({i for i, _ in self.upstream}))
        self.pairs_by_source: dict[str, list[Pair]] = {}
        for pair in self.upstream:
            self.pairs_by_source.setdefault(pair[0], []).append(pair)
        self._paths: dict[Pair, tuple[tuple[str, ...], ...]] = {}

    def paths(self, pair: Pair) -> tuple[tuple[str, ...], ...]:
        cached = self._paths.get(pair)
        if cached is None:
            cached = tuple(_simple_paths(self.index, pair[0], pair[1]))
            self._paths[pair] = cached
        return cached


def _split_annotations(annotations: Iterable[Annotation]):
    """Partition annotations into pins, NotFlowsFrom pairs, contradictions.

    Exact duplicates collapse. A pair pinned to two different types is
    recorded as a contradiction (first value kept in the pin map).
    """
    pinned: dict[Pair, DependencyType] = {}
    nff: set[Pair] = set()
    contradictory: list[tuple[Pair, DependencyType, DependencyType]] = []
    for ann in annotations:
        if isinstance(ann.assertion, ReachabilityAssertion):
            nff.add(ann.pair)
        else:
            previous = pinned.get(ann.pair)
            if previous is not None and previous != ann.assertion:
                contradictory.append((ann.pair, previous, ann.assertion))
            else:
                pinned[ann.pair] = ann.assertion
    return pinned, nff, contradictory


def _enumerate(ctx: _Reasoning, pinned: Mapping[Pair, DependencyType], max_models: int):
    """Backtracking search over unpinned direct pairs.

    Returns (models, truncated): up to ``max_models`` full assignments in
    discovery order, each mapping every upstream pair to its type.
    """
    index = ctx.index
    pinned_direct = {p: int(t) for p, t in pinned.items() if p in ctx.direct_set}
    pinned_indirect = {p: int(t) for p, t in pinned.items() if p not in ctx.direct_set}
    free = [p for p in ctx.direct if p not in pinned_direct]
    watch: dict[str, list[tuple[Pair, int]]] = {}
    for pair, t in sorted(pinned.items()):
        watch.setdefault(pair[0], []).append((pair, int(t)))

    assigned: dict[Pair, int] = dict(pinned_direct)
    models: list[dict] = []
    limit = max_models + 1

    def bounds_ok() -> bool:
        # monotone envelope: unassigned direct pairs all-weakest vs all-strongest
        if not watch:
            return True
        low = {p: 0 for p in free}
        low.update(assigned)
        high = {p: 4 for p in free}
        high.update(assigned)
        for source, targets in watch.items():
            best_low = _widest(index, source, low)
            best_high = _widest(index, source, high)
            for pair, want in targets:
                if want < best_low.get(pair[1], -1) or want > best_high.get(pair[1], -1):
                    return False
        return True

    def leaf() -> None:
        values: dict[Pair, int] = {}
        for source in ctx.sources:
            best = _widest(index, source, assigned)
            for pair in ctx.pairs_by_source[source]:
                values[pair] = best[pair[1]]
        for pair in ctx.direct:
            if values[pair] != assigned[pair]:
                return
        for pair, want in pinned_indirect.items():
            if values[pair] != want:
                return
        models.append({p: DependencyType(v) for p, v in values.items()})

    def search(k: int) -> None:
        if len(models) >= limit:
            return
        if k == len(free):
            leaf()
            return
        pair = free[k]
        for rank in range(5):
            assigned[pair] = rank
            if bounds_ok():
                search(k + 1)
            if len(models) >= limit:
                break
        del assigned[pair]

    if bounds_ok():
        search(0)
    truncated = len(models) > max_models
    return models, truncated


def _result(ctx: _Reasoning, models: list, truncated: bool, limit: Optional[int] = None):
    def key(model: dict) -> tuple[int, ...]:
        return tuple(int(model[p]) for p in ctx.upstream)

    ordered = sorted(models, key=key)
    if limit is not None:
        ordered = ordered[:limit]
    options: dict[Pair, tuple[DependencyType, ...]] = {}
    entailed: dict[Pair, DependencyType] = {}
    if ordered:
        for pair in ctx.upstream:
            seen = sorted({int(m[pair]) for m in ordered})
            opts = tuple(DependencyType(v) for v in seen)
            options[pair] = opts
            if len(opts) == 1:
                entailed[pair] = opts[0]
    return SolveResult(
        answer_sets=tuple(ordered),
        entailed=entailed,
        options=options,
        truncated=truncated,
    )


def _prepare(spec: WorkflowSpec, annotations: Iterable[Annotation]):
    annotations = list(annotations)
    errors = validate_structure(spec, annotations)
    if errors:
        raise StructuralValidationError(errors)
    ctx = _Reasoning(spec)
    pinned, nff, contradictory = _split_annotations(annotations)
    return ctx, pinned, nff, contradictory


def solve(
    spec: WorkflowSpec,
    annotations: Iterable[Annotation] = (),
    max_models: int = 1024,
) -> SolveResult:
    """Enumerate the answer sets extending the user annotations.

    Searches only the unpinned direct pairs; multi-block values follow from
    the strongest-path rule and are checked against user pins. Returns at
    most ``max_models`` sets in canonical order with ``truncated`` set when
    more exist. A violated NotFlowsFrom assertion or a pair pinned to two
    types yields zero sets. Raises StructuralValidationError on an invalid
    workflow or annotation list.
    """
    if max_models < 1:
        raise ValueError("max_models must be at least 1")
    ctx, pinned, nff, contradictory = _prepare(spec, annotations)
    if contradictory or any(pair in ctx.upstream_set for pair in nff):
        return _result(ctx, [], False)
    models, truncated = _enumerate(ctx, pinned, max_models)
    return _result(ctx, models, truncated, limit=max_models)


def brute_force_solve(
    spec: WorkflowSpec,
    annotations: Iterable[Annotation] = (),
    cap: int = 10,
) -> SolveResult:
    """Oracle enumeration: try every assignment over all upstream pairs.

    Materializes all 5^n combinations (n = number of upstream pairs, pairs
    pinned by the user keep a single value) and keeps those satisfying the
    two path constraints stated literally: the assigned type is one of the
    per-path minimums, and no path minimum is strictly stronger. Raises
    BruteForceCapError when n exceeds ``cap``; never truncates.
    """
    ctx, pinned, nff, contradictory = _prepare(spec, annotations)
    if len(ctx.upstream) > cap:
        raise BruteForceCapError(
            f"{len(ctx.upstream)} upstream pairs exceed the brute-force cap of {cap}"
        )
    if contradictory or any(pair in ctx.upstream_set for pair in nff):
        return _result(ctx, [], False)

    pair_paths = {
        pair: tuple(_path_hops(path) for path in ctx.paths(pair))
        for pair in ctx.upstream
    }
    domains = []
    for pair in ctx.upstream:
        t = pinned.get(pair)
        domains.append((int(t),) if t is not None else (0, 1, 2, 3, 4))

    models = []
    for combo in itertools.product(*domains):
        value = dict(zip(ctx.upstream, combo))
        ok = True
        for pair, paths in pair_paths.items():
            mins = [min(value[hop] for hop in hops) for hops in paths]
            assigned = value[pair]
            if assigned not in mins or any(m > assigned for m in mins):
                ok = False
                break
        if ok:
            models.append({p: DependencyType(v) for p, v in value.items()})
    return _result(ctx, models, False)


def _achievable(ctx: _Reasoning, path: tuple[str, ...], direct_pins: Mapping[Pair, int]):
    hops = _path_hops(path)
    caps = [direct_pins[h] for h in hops if h in direct_pins]
    cap = min(caps) if caps else 4
    if all(h in direct_pins for h in hops):
        return (cap,)
    return tuple(range(cap + 1))


def _witness_paths(ctx: _Reasoning, pair: Pair, direct_pins: Mapping[Pair, int]):
    witnesses = []
    for path in ctx.paths(pair):
        ach = _achievable(ctx, path, direct_pins)
        witnesses.append(
            WitnessPath(path, tuple(DependencyType(v) for v in ach))
        )
    return tuple(witnesses)


def _classify(
    ctx: _Reasoning,
    pair: Pair,
    asserted: DependencyType,
    direct_pins: Mapping[Pair, int],
    relaxed_options,
) -> Conflict:
    """Build a conflict for one rejected annotation.

    A path whose achievable minimum exceeds the asserted type forces a
    stronger value (stronger-path-exists). If no path can ever take the
    asserted value, the assertion names an impossible path type. Ties in
    joint conflicts fall back to the values seen after relaxation.
    """
    t = int(asserted)
    witnesses = _witness_paths(ctx, pair, direct_pins)
    union: set[int] = set()
    forced = False
    for w in witnesses:
        ach = [int(v) for v in w.achievable]
        union.update(ach)
        if min(ach) > t:
            forced = True
    if forced:
        reason = ConflictReason.STRONGER_PATH_EXISTS
    elif t not in union:
        reason = ConflictReason.NOT_A_VALID_PATH_TYPE
    elif relaxed_options and min(relaxed_options) > t:
        reason = ConflictReason.STRONGER_PATH_EXISTS
    else:
        reason = ConflictReason.NOT_A_VALID_PATH_TYPE
    return Conflict(pair, DependencyType(t), witnesses, reason)


def _explain(ctx: _Reasoning, pinned: Mapping[Pair, DependencyType]):
    """Greedy relaxation: drop annotations until satisfiable, report each drop.

    Multi-block annotations are tried before direct ones, lexicographically
    within each group, so explanations land on the span assertions that
    usually cause the clash.
    """
    conflicts: list[Conflict] = []
    remaining = dict(pinned)

    def order(items):
        return sorted(items, key=lambda kv: (kv[0] in ctx.direct_set, kv[0]))

    while remaining:
        models, _ = _enumerate(ctx, remaining, 1)
        if models:
            break
        dropped = False
        for pair, t in order(remaining.items()):
            trial = {q: v for q, v in remaining.items() if q != pair}
            trial_models, _ = _enumerate(ctx, trial, _EXPLAIN_CAP)
            if trial_models:
                pins = {q: int(v) for q, v in trial.items() if q in ctx.direct_set}
                opts = sorted({int(m[pair]) for m in trial_models})
                conflicts.append(_classify(ctx, pair, t, pins, opts))
                remaining = trial
                dropped = True
                break
        if not dropped:
            pair, t = order(remaining.items())[0]
            remaining = {q: v for q, v in remaining.items() if q != pair}
            pins = {q: int(v) for q, v in remaining.items() if q in ctx.direct_set}
            conflicts.append(_classify(ctx, pair, t, pins, None))
    return conflicts


def check_consistency(
    spec: WorkflowSpec, annotations: Iterable[Annotation] = ()
) -> list[Conflict]:
    """Explain why the annotations admit no answer set; empty means consistent.

    Violated NotFlowsFrom assertions are reported first, then pairs pinned
    to two types, then a greedy relaxation of the remaining pins where each
    drop that restores satisfiability yields one witnessed conflict. Raises
    StructuralValidationError on an invalid workflow or annotation list.
    """
    ctx, pinned, nff, contradictory = _prepare(spec, annotations)
    conflicts: list[Conflict] = []
    direct_pins = {p: int(t) for p, t in pinned.items() if p in ctx.direct_set}

    for pair in sorted(nff):
        if pair in ctx.upstream_set:
            conflicts.append(
                Conflict(
                    pair,
                    NOT_FLOWS_FROM,
                    _witness_paths(ctx, pair, direct_pins),
                    ConflictReason.REACHABLE_BUT_NOT_FLOWS_FROM,
                )
            )
    for pair, _first, second in contradictory:
        conflicts.append(_classify(ctx, pair, second, direct_pins, None))

    models, _ = _enumerate(ctx, pinned, 1)
    if models:
        return conflicts
    conflicts.extend(_explain(ctx, pinned))
    return conflicts


def infer(
    spec: WorkflowSpec,
    annotations: Iterable[Annotation] = (),
    max_models: int = 1024,
) -> dict[Pair, PairReport]:
    """Per-pair inference over all answer sets extending the annotations.

    Returns a report for every upstream pair: the entailed type when all
    answer sets agree, the full option tuple otherwise, and whether the pair
    was pinned by the user. Raises InconsistentWorkflowError (carrying the
    conflicts) when no answer set exists.
    """
    result = solve(spec, annotations, max_models=max_models)
    if not result.consistent:
        raise InconsistentWorkflowError(check_consistency(spec, annotations))
    user_pairs = {
        a.pair for a in annotations if isinstance(a.assertion, DependencyType)
    }
    report: dict[Pair, PairReport] = {}
    for pair in sorted(result.options):
        report[pair] = PairReport(
            entailed=result.entailed.get(pair),
            options=result.options[pair],
            origin="user" if pair in user_pairs else "inferred",
        )
    return report
