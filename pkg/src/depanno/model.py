"""Workflow dataflow model and the dependency-type strength lattice.

A workflow is a bipartite graph: program blocks and data blocks joined by
uniquely labeled input and output edges. An input edge reads a data block,
an output edge writes one, and each data block has at most one writer.

Dependency annotations relate an input edge to an output edge. Five
annotation kinds form a total order by strength, from FlowsFrom (the input
was merely available when the block ran) up to SameAs (the output items are
the very items that arrived on the input). A sixth kind, NotFlowsFrom,
asserts the absence of any dataflow path between the two edges; it takes
part in no strength comparison and never composes.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Union


class DependencyType(enum.IntEnum):
    """The five dependency kinds, ordered by strength.

    The integer value is the strength rank, so builtin comparisons agree
    with the weaker-or-equal relation used by the reasoner.
    """

    FLOWS_FROM = 0
    DEPENDS_ON = 1
    DERIVED_FROM = 2
    VALUE_OF = 3
    SAME_AS = 4

    @property
    def display(self) -> str:
        return _TYPE_DISPLAY[self]

    @classmethod
    def from_name(cls, name: str) -> "DependencyType":
        try:
            return _TYPE_BY_NAME[name]
        except KeyError:
            raise ValueError(f"unknown dependency type {name!r}") from None


_TYPE_DISPLAY = {
    DependencyType.FLOWS_FROM: "FlowsFrom",
    DependencyType.DEPENDS_ON: "DependsOn",
    DependencyType.DERIVED_FROM: "DerivedFrom",
    DependencyType.VALUE_OF: "ValueOf",
    DependencyType.SAME_AS: "SameAs",
}
_TYPE_BY_NAME = {name: t for t, name in _TYPE_DISPLAY.items()}


class ReachabilityAssertion(enum.Enum):
    """Assertion that an input edge is not upstream of an output edge.

    NOT_FLOWS_FROM is user-assertable only. It is outside the strength
    order: comparing or composing it with the five dependency types is a
    type error by construction.
    """

    NOT_FLOWS_FROM = "NotFlowsFrom"

    @property
    def display(self) -> str:
        return self.value


NOT_FLOWS_FROM = ReachabilityAssertion.NOT_FLOWS_FROM

AssertionType = Union[DependencyType, ReachabilityAssertion]

# All six legal annotation names, weakest first, NotFlowsFrom last.
ASSERTION_NAMES: tuple[str, ...] = tuple(
    _TYPE_DISPLAY[t] for t in sorted(DependencyType)
) + (NOT_FLOWS_FROM.value,)


def assertion_from_name(name: str) -> AssertionType:
    """Resolve one of the six annotation names to its enum value."""
    if name == NOT_FLOWS_FROM.value:
        return NOT_FLOWS_FROM
    if name in _TYPE_BY_NAME:
        return _TYPE_BY_NAME[name]
    legal = ", ".join(ASSERTION_NAMES)
    raise ValueError(f"unknown dependency type {name!r} (expected one of {legal})")


def weaker(t1: DependencyType, t2: DependencyType) -> bool:
    """True iff t1 is weaker than or equally strong as t2."""
    return t1 <= t2


def compose(t1: DependencyType, t2: DependencyType) -> DependencyType:
    """Dependency type across two consecutive hops: the weaker of the two."""
    return t1 if t1 <= t2 else t2


@dataclass(frozen=True, order=True)
class Edge:
    """One labeled port. Direction "in" reads the data block, "out" writes it."""

    label: str
    program: str
    data: str
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in ("in", "out"):
            raise ValueError(
                f"edge {self.label!r}: direction must be 'in' or 'out', "
                f"got {self.direction!r}"
            )
        for field_name in ("label", "program", "data"):
            if not getattr(self, field_name):
                raise ValueError(f"edge field {field_name!r} must be nonempty")


@dataclass(frozen=True)
class WorkflowSpec:
    """A named dataflow graph of program blocks, data blocks, and edges.

    Collections are stored as frozensets, so equality and hashing ignore
    declaration order. Any iterable is accepted for construction.
    """

    name: str
    programs: frozenset[str] = frozenset()
    data_blocks: frozenset[str] = frozenset()
    edges: frozenset[Edge] = frozenset()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("workflow name must be nonempty")
        object.__setattr__(self, "programs", frozenset(self.programs))
        object.__setattr__(self, "data_blocks", frozenset(self.data_blocks))
        object.__setattr__(self, "edges", frozenset(self.edges))


@dataclass(frozen=True)
class Annotation:
    """A dependency assertion from an input edge label to an output edge label."""

    input_edge: str
    output_edge: str
    assertion: AssertionType
    origin: str = "user"

    def __post_init__(self) -> None:
        if self.origin not in ("user", "inferred"):
            raise ValueError(f"origin must be 'user' or 'inferred', got {self.origin!r}")
        if not isinstance(self.assertion, (DependencyType, ReachabilityAssertion)):
            raise TypeError(f"assertion must be a dependency kind, got {self.assertion!r}")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.input_edge, self.output_edge)


@dataclass(frozen=True)
class StructuralError:
    """One violated structural rule, identified by kind and offending subject."""

    kind: str
    subject: str
    message: str


class UnknownLabelError(LookupError):
    """An edge label does not exist in the workflow."""

    def __init__(self, label: str):
        super().__init__(f"unknown edge label {label!r}")
        self.label = label


class StructuralValidationError(ValueError):
    """Raised by operations that require a structurally valid workflow."""

    def __init__(self, errors: Iterable[StructuralError]):
        self.errors = list(errors)
        summary = "; ".join(e.message for e in self.errors) or "unknown error"
        super().__init__(f"workflow is structurally invalid: {summary}")


class _SpecIndex:
    """Adjacency maps for one spec. Assumes unique edge labels.

    All listings are sorted so every traversal built on top of this index
    is deterministic.
    """

    def __init__(self, spec: WorkflowSpec):
        self.spec = spec
        self.by_label: dict[str, Edge] = {}
        block_ins: dict[str, list[str]] = defaultdict(list)
        block_outs: dict[str, list[str]] = defaultdict(list)
        readers: dict[str, list[str]] = defaultdict(list)
        writers: dict[str, list[str]] = defaultdict(list)
        for edge in sorted(spec.edges):
            self.by_label[edge.label] = edge
            if edge.direction == "in":
                block_ins[edge.program].append(edge.label)
                readers[edge.data].append(edge.label)
            else:
                block_outs[edge.program].append(edge.label)
                writers[edge.data].append(edge.label)
        self.block_ins: dict[str, tuple[str, ...]] = {
            p: tuple(labels) for p, labels in block_ins.items()
        }
        self.block_outs: dict[str, tuple[str, ...]] = {
            p: tuple(labels) for p, labels in block_outs.items()
        }
        self.readers_of: dict[str, tuple[str, ...]] = {
            d: tuple(labels) for d, labels in readers.items()
        }
        self.writers_of: dict[str, tuple[str, ...]] = {
            d: tuple(labels) for d, labels in writers.items()
        }
        self.in_labels: tuple[str, ...] = tuple(
            e.label for e in sorted(spec.edges) if e.direction == "in"
        )
        self.out_labels: tuple[str, ...] = tuple(
            e.label for e in sorted(spec.edges) if e.direction == "out"
        )
        # Direct pairs: every (in, out) combination within one block.
        pairs = []
        for program in sorted(set(self.block_ins) & set(self.block_outs)):
            for i in self.block_ins[program]:
                for o in self.block_outs[program]:
                    pairs.append((i, o))
        self.direct_pairs: tuple[tuple[str, str], ...] = tuple(sorted(pairs))

    def ins_of_out(self, out_label: str) -> tuple[str, ...]:
        """In-edges that read the data block this out-edge writes."""
        return self.readers_of.get(self.by_label[out_label].data, ())

    def reachable_ins(self, start_in: str) -> set[str]:
        """In-labels reachable from start_in through block and data hops."""
        seen = {start_in}
        stack = [start_in]
        while stack:
            label = stack.pop()
            program = self.by_label[label].program
            for out in self.block_outs.get(program, ()):
                for nxt in self.ins_of_out(out):
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
        return seen

    def reaching_outs(self, target_out: str) -> set[str]:
        """Out-labels from which target_out is reachable, target included."""
        seen_outs = {target_out}
        seen_ins: set[str] = set()
        stack = [target_out]
        while stack:
            out = stack.pop()
            program = self.by_label[out].program
            for i in self.block_ins.get(program, ()):
                if i in seen_ins:
                    continue
                seen_ins.add(i)
                for writer in self.writers_of.get(self.by_label[i].data, ()):
                    if writer not in seen_outs:
                        seen_outs.add(writer)
                        stack.append(writer)
        return seen_outs


def connected(output_label: str, input_label: str, spec: WorkflowSpec) -> bool:
    """True iff the named output edge writes the data block the input edge reads."""
    by_label = {e.label: e for e in spec.edges}
    for label in (output_label, input_label):
        if label not in by_label:
            raise UnknownLabelError(label)
    out_edge = by_label[output_label]
    in_edge = by_label[input_label]
    return (
        out_edge.direction == "out"
        and in_edge.direction == "in"
        and out_edge.data == in_edge.data
    )


def up_stream_pairs(spec: WorkflowSpec) -> set[tuple[str, str]]:
    """All (input label, output label) pairs joined by a dataflow path.

    A pair is included when the two edges sit on the same block, or when a
    chain of blocks joined through shared data blocks leads from the input
    to the output. Computed as graph reachability, so cyclic workflows
    terminate.
    """
    index = _SpecIndex(spec)
    pairs: set[tuple[str, str]] = set()
    for start in index.in_labels:
        seen_ins = {start}
        seen_outs: set[str] = set()
        stack = [start]
        while stack:
            label = stack.pop()
            program = index.by_label[label].program
            for out in index.block_outs.get(program, ()):
                if out in seen_outs:
                    continue
                seen_outs.add(out)
                for nxt in index.ins_of_out(out):
                    if nxt not in seen_ins:
                        seen_ins.add(nxt)
                        stack.append(nxt)
        pairs.update((start, out) for out in seen_outs)
    return pairs


def validate_structure(
    spec: WorkflowSpec, annotations: Iterable[Annotation] = ()
) -> list[StructuralError]:
    """Check the structural rules; return all violations, empty when valid.

    Rules: edge labels are globally unique, edges reference declared
    programs and data blocks, and each data block has at most one writer.
    Annotations must name an existing in-edge and out-edge, and a five-type
    annotation must sit on a pair joined by a dataflow path. The
    reachability check runs only when the graph rules all pass.
    """
    annotations = list(annotations)
    errors: list[StructuralError] = []

    label_counts = Counter(e.label for e in spec.edges)
    for label in sorted(l for l, n in label_counts.items() if n > 1):
        errors.append(
            StructuralError(
                "duplicate-label",
                label,
                f"edge label {label!r} is used by more than one edge",
            )
        )

    for edge in sorted(spec.edges):
        if edge.program not in spec.programs:
            errors.append(
                StructuralError(
                    "unknown-program",
                    edge.label,
                    f"edge {edge.label!r} references undeclared program {edge.program!r}",
                )
            )
        if edge.data not in spec.data_blocks:
            errors.append(
                StructuralError(
                    "unknown-data-block",
                    edge.label,
                    f"edge {edge.label!r} references undeclared data block {edge.data!r}",
                )
            )

    writers: dict[str, list[str]] = defaultdict(list)
    for edge in sorted(spec.edges):
        if edge.direction == "out":
            writers[edge.data].append(edge.label)
    for data, labels in sorted(writers.items()):
        if len(labels) > 1:
            errors.append(
                StructuralError(
                    "multiple-writers",
                    data,
                    f"data block {data!r} is written by multiple edges: "
                    + ", ".join(labels),
                )
            )

    by_label = {e.label: e for e in spec.edges}
    for ann in annotations:
        for label, want in ((ann.input_edge, "in"), (ann.output_edge, "out")):
            edge = by_label.get(label)
            if edge is None:
                errors.append(
                    StructuralError(
                        "unknown-edge",
                        label,
                        f"annotation references unknown edge label {label!r}",
                    )
                )
            elif edge.direction != want:
                errors.append(
                    StructuralError(
                        "annotation-direction",
                        label,
                        f"annotation uses {edge.direction}-edge {label!r} "
                        f"where an {want}-edge is required",
                    )
                )

    if not errors:
        upstream = up_stream_pairs(spec)
        for ann in annotations:
            if isinstance(ann.assertion, DependencyType) and ann.pair not in upstream:
                errors.append(
                    StructuralError(
                        "annotation-not-upstream",
                        f"{ann.input_edge}->{ann.output_edge}",
                        f"annotation {ann.input_edge!r} -> {ann.output_edge!r} "
                        f"({ann.assertion.display}) relates edges with no "
                        "dataflow path between them",
                    )
                )
    return errors
