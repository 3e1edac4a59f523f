"""Trace parsing and conformance checks against annotations."""

from __future__ import annotations

import json
import random

import pytest

from depanno import (
    Annotation,
    DataItem,
    DependencyType,
    Edge,
    Invocation,
    Trace,
    TraceFormatError,
    TraceViolation,
    WorkflowSpec,
    check_trace,
    parse_trace,
    warn_sameas_candidates,
)
from depanno.random_workflows import random_workflow

from conftest import WORKFLOWS, load_workflow

SA = DependencyType.SAME_AS
VO = DependencyType.VALUE_OF


def read_trace(name: str) -> str:
    return (WORKFLOWS / name).read_text(encoding="utf-8")


def single_block_spec() -> WorkflowSpec:
    return WorkflowSpec(
        "copy",
        ["p"],
        ["d1", "d2"],
        [Edge("a", "p", "d1", "in"), Edge("b", "p", "d2", "out")],
    )


def one_shot(reads, writes) -> Trace:
    return Trace("copy", (Invocation("p", {"a": tuple(reads)}, {"b": tuple(writes)}),))


class TestParseTrace:
    def test_fixture_parses(self, normalize_filter):
        spec, _ = normalize_filter
        trace = parse_trace(read_trace("normalize_filter_trace_ok.json"), spec)
        assert trace.workflow == "normalize_filter"
        assert len(trace.invocations) == 2
        assert trace.invocations[0].block == "normalize"
        assert trace.invocations[0].reads["x1"][0] == DataItem("n1", "10")

    def test_reads_and_writes_may_be_omitted(self):
        trace = parse_trace('{"workflow": "w", "invocations": [{"block": "p"}]}')
        assert trace.invocations[0].reads == {}
        assert trace.invocations[0].writes == {}

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("{not json", "invalid JSON"),
            ("[]", "top level: expected an object"),
            ('{"invocations": []}', "'workflow' must be a nonempty string"),
            ('{"workflow": "w"}', "'invocations' must be a list"),
            ('{"workflow": "w", "invocations": [42]}', "invocations[0]: expected an object"),
            (
                '{"workflow": "w", "invocations": [{"reads": {}}]}',
                "invocations[0]: 'block' must be a nonempty string",
            ),
            (
                '{"workflow": "w", "invocations": [{"block": "p", "reads": []}]}',
                "invocations[0].reads: expected an object",
            ),
            (
                '{"workflow": "w", "invocations": [{"block": "p", "reads": {"a": {}}}]}',
                "invocations[0].reads.a: expected a list",
            ),
            (
                '{"workflow": "w", "invocations": [{"block": "p", "reads": {"a": [{"value": "v"}]}}]}',
                "invocations[0].reads.a[0]: 'id' must be a nonempty string",
            ),
            (
                '{"workflow": "w", "invocations": [{"block": "p", "reads": {"a": [{"id": "i"}]}}]}',
                "invocations[0].reads.a[0]: 'value' must be a string",
            ),
        ],
    )
    def test_malformed_documents_are_rejected(self, text, fragment):
        with pytest.raises(TraceFormatError) as info:
            parse_trace(text)
        assert fragment in str(info.value)

    def test_resolution_against_spec(self):
        spec = single_block_spec()
        good = {"workflow": "copy", "invocations": [{"block": "p", "reads": {"a": []}}]}
        parse_trace(json.dumps(good), spec)

        wrong_name = dict(good, workflow="other")
        with pytest.raises(TraceFormatError, match="trace is for workflow 'other'"):
            parse_trace(json.dumps(wrong_name), spec)

        unknown_block = {"workflow": "copy", "invocations": [{"block": "q"}]}
        with pytest.raises(TraceFormatError, match="unknown block 'q'"):
            parse_trace(json.dumps(unknown_block), spec)

        unknown_label = {
            "workflow": "copy",
            "invocations": [{"block": "p", "reads": {"zz": []}}],
        }
        with pytest.raises(TraceFormatError, match="unknown edge label 'zz'"):
            parse_trace(json.dumps(unknown_label), spec)

        wrong_direction = {
            "workflow": "copy",
            "invocations": [{"block": "p", "reads": {"b": []}}],
        }
        with pytest.raises(TraceFormatError, match="edge 'b' is an out-edge"):
            parse_trace(json.dumps(wrong_direction), spec)

    def test_label_on_wrong_block(self, normalize_filter):
        spec, _ = normalize_filter
        doc = {
            "workflow": "normalize_filter",
            "invocations": [{"block": "filter", "reads": {"x1": []}}],
        }
        with pytest.raises(TraceFormatError, match="belongs to block 'normalize'"):
            parse_trace(json.dumps(doc), spec)


class TestCheckTrace:
    def test_conforming_fixture_has_no_violations(self, normalize_filter):
        spec, annotations = normalize_filter
        trace = parse_trace(read_trace("normalize_filter_trace_ok.json"), spec)
        assert check_trace(spec, annotations, trace) == []

    def test_fresh_identity_breaks_sameas(self, normalize_filter):
        spec, annotations = normalize_filter
        trace = parse_trace(read_trace("normalize_filter_trace_bad.json"), spec)
        violations = check_trace(spec, annotations, trace)
        assert violations == [
            TraceViolation(
                invocation=1,
                pair=("x3", "x4"),
                annotation=SA,
                kind="identity-violation",
                offending=(DataItem("f9", "0.20"),),
            )
        ]

    def test_valueof_checks_values_not_identities(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", VO)]
        fresh_id_same_value = one_shot(
            [DataItem("i1", "7")], [DataItem("o1", "7")]
        )
        assert check_trace(spec, annotations, fresh_id_same_value) == []

        foreign_value = one_shot([DataItem("i1", "7")], [DataItem("o1", "8")])
        violations = check_trace(spec, annotations, foreign_value)
        assert violations == [
            TraceViolation(0, ("a", "b"), VO, "value-violation", (DataItem("o1", "8"),))
        ]

    def test_sameas_requires_identity_reuse(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", SA)]
        reused = one_shot([DataItem("i1", "7")], [DataItem("i1", "7")])
        assert check_trace(spec, annotations, reused) == []

        copied = one_shot([DataItem("i1", "7")], [DataItem("o1", "7")])
        violations = check_trace(spec, annotations, copied)
        assert len(violations) == 1
        assert violations[0].kind == "identity-violation"

    def test_weak_types_are_never_checked(self):
        spec = single_block_spec()
        trace = one_shot([DataItem("i1", "7")], [DataItem("o1", "99")])
        for dep_type in (
            DependencyType.FLOWS_FROM,
            DependencyType.DEPENDS_ON,
            DependencyType.DERIVED_FROM,
        ):
            assert check_trace(spec, [Annotation("a", "b", dep_type)], trace) == []

    def test_cross_block_annotations_are_not_checked(self, chain_span):
        spec, annotations = chain_span
        stronger = [a for a in annotations] + [Annotation("x1", "x4", SA)]
        doc = {
            "workflow": "chain_span",
            "invocations": [
                {
                    "block": "p1",
                    "reads": {"x1": [{"id": "i1", "value": "1"}]},
                    "writes": {"x2": [{"id": "m1", "value": "2"}]},
                },
                {
                    "block": "p2",
                    "reads": {"x3": [{"id": "m1", "value": "2"}]},
                    "writes": {"x4": [{"id": "z9", "value": "3"}]},
                },
            ],
        }
        trace = parse_trace(json.dumps(doc), spec)
        # (x1, x4) spans two blocks, so the fresh id on x4 is not checkable
        assert check_trace(spec, stronger, trace) == []

    def test_missing_ports_count_as_empty(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", SA)]
        silent = Trace("copy", (Invocation("p", {}, {}),))
        assert check_trace(spec, annotations, silent) == []
        write_only = Trace(
            "copy", (Invocation("p", {}, {"b": (DataItem("o1", "7"),)}),)
        )
        assert len(check_trace(spec, annotations, write_only)) == 1

    def test_violations_are_ordered(self):
        spec = WorkflowSpec(
            "two_ports",
            ["p"],
            ["d1", "d2", "d3", "d4"],
            [
                Edge("a", "p", "d1", "in"),
                Edge("b", "p", "d2", "in"),
                Edge("y", "p", "d3", "out"),
                Edge("z", "p", "d4", "out"),
            ],
        )
        annotations = [
            Annotation("b", "z", SA),
            Annotation("a", "y", SA),
        ]
        bad = Invocation(
            "p",
            {"a": (DataItem("i1", "1"),), "b": (DataItem("i2", "2"),)},
            {"y": (DataItem("f1", "1"),), "z": (DataItem("f2", "2"),)},
        )
        trace = Trace("two_ports", (bad, bad))
        violations = check_trace(spec, annotations, trace)
        assert [(v.invocation, v.pair) for v in violations] == [
            (0, ("a", "y")),
            (0, ("b", "z")),
            (1, ("a", "y")),
            (1, ("b", "z")),
        ]

    def test_unresolvable_trace_raises(self, normalize_filter):
        spec, annotations = normalize_filter
        trace = Trace("normalize_filter", (Invocation("nope", {}, {}),))
        with pytest.raises(TraceFormatError):
            check_trace(spec, annotations, trace)

    def test_synthesized_conforming_traces_never_violate(self):
        # identity-preserving runs satisfy every SameAs/ValueOf check
        for seed in range(40):
            rng = random.Random(seed)
            spec = random_workflow(rng, max_blocks=5, cycle_prob=0.2)
            by_program: dict[str, tuple[list, list]] = {}
            for e in spec.edges:
                slot = by_program.setdefault(e.program, ([], []))
                slot[0 if e.direction == "in" else 1].append(e.label)
            annotations = []
            invocations = []
            for program in sorted(spec.programs):
                ins, outs = by_program.get(program, ([], []))
                for i in ins:
                    for o in outs:
                        annotations.append(
                            Annotation(i, o, SA if rng.random() < 0.5 else VO)
                        )
                item = DataItem(f"item_{program}", "0")
                invocations.append(
                    Invocation(
                        program,
                        {label: (item,) for label in ins},
                        {label: (item,) for label in outs},
                    )
                )
            trace = Trace(spec.name, tuple(invocations))
            assert check_trace(spec, annotations, trace) == []


class TestSameAsCandidates:
    def test_reused_ids_trigger_the_warning(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", VO)]
        trace = one_shot([DataItem("i1", "7")], [DataItem("i1", "7")])
        warnings = warn_sameas_candidates(spec, annotations, trace)
        assert len(warnings) == 1
        assert warnings[0].pair == ("a", "b")
        assert "consistent with SameAs" in warnings[0].message

    def test_fresh_id_anywhere_suppresses_the_warning(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", VO)]
        trace = Trace(
            "copy",
            (
                Invocation(
                    "p",
                    {"a": (DataItem("i1", "7"),)},
                    {"b": (DataItem("i1", "7"),)},
                ),
                Invocation(
                    "p",
                    {"a": (DataItem("i2", "8"),)},
                    {"b": (DataItem("fresh", "8"),)},
                ),
            ),
        )
        assert warn_sameas_candidates(spec, annotations, trace) == []

    def test_requires_a_witnessed_write(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", VO)]
        empty = Trace("copy", ())
        assert warn_sameas_candidates(spec, annotations, empty) == []
        read_only = Trace(
            "copy", (Invocation("p", {"a": (DataItem("i1", "7"),)}, {}),)
        )
        assert warn_sameas_candidates(spec, annotations, read_only) == []

    def test_sameas_annotations_are_not_flagged(self):
        spec = single_block_spec()
        annotations = [Annotation("a", "b", SA)]
        trace = one_shot([DataItem("i1", "7")], [DataItem("i1", "7")])
        assert warn_sameas_candidates(spec, annotations, trace) == []
