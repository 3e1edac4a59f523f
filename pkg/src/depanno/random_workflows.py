"""Random workflow and annotation generators for tests and experiments.

Every generated workflow is structurally valid by construction: labels are
drawn from one counter, and each out-edge writes a fresh data block so the
single-writer rule cannot be violated. Cycles appear when an input draws a
data block written by the same or a later block.
"""

from __future__ import annotations

import random

from .model import (
    Annotation,
    DependencyType,
    Edge,
    NOT_FLOWS_FROM,
    WorkflowSpec,
    up_stream_pairs,
)


def random_workflow(
    rng: random.Random,
    max_blocks: int = 6,
    max_ins: int = 2,
    max_outs: int = 2,
    cycle_prob: float = 0.15,
    name: str = "rand",
) -> WorkflowSpec:
    """Generate a structurally valid workflow.

    Inputs read an earlier block's output most of the time, a fresh source
    block otherwise, and with ``cycle_prob`` any block's output, which can
    close a cycle. ``cycle_prob=0`` guarantees a DAG.
    """
    n_blocks = rng.randint(1, max_blocks)
    programs = [f"b{k}" for k in range(1, n_blocks + 1)]
    edges: list[Edge] = []
    label_counter = 0
    data_counter = 0

    def fresh_label() -> str:
        nonlocal label_counter
        label_counter += 1
        return f"e{label_counter}"

    def fresh_data() -> str:
        nonlocal data_counter
        data_counter += 1
        return f"d{data_counter}"

    outs_of: dict[str, list[str]] = {}
    for program in programs:
        outs_of[program] = [fresh_data() for _ in range(rng.randint(0, max_outs))]
        for data in outs_of[program]:
            edges.append(Edge(fresh_label(), program, data, "out"))

    for k, program in enumerate(programs):
        earlier = [d for p in programs[:k] for d in outs_of[p]]
        anywhere = [d for p in programs for d in outs_of[p]]
        for _ in range(rng.randint(0, max_ins)):
            roll = rng.random()
            if anywhere and roll < cycle_prob:
                data = rng.choice(anywhere)
            elif earlier and roll < 0.85:
                data = rng.choice(earlier)
            else:
                data = fresh_data()
            edges.append(Edge(fresh_label(), program, data, "in"))

    data_blocks = {e.data for e in edges}
    return WorkflowSpec(name, programs, data_blocks, edges)


def random_annotations(
    rng: random.Random,
    spec: WorkflowSpec,
    density: float = 0.35,
    notflowsfrom_prob: float = 0.1,
) -> list[Annotation]:
    """Pin a random subset of upstream pairs, sometimes adding NotFlowsFrom.

    The NotFlowsFrom pair is drawn from all (in, out) label combinations,
    so it occasionally lands on a reachable pair and makes the annotation
    set unsatisfiable on purpose.
    """
    annotations: list[Annotation] = []
    for pair in sorted(up_stream_pairs(spec)):
        if rng.random() < density:
            dep_type = DependencyType(rng.randrange(len(DependencyType)))
            annotations.append(Annotation(pair[0], pair[1], dep_type))
    ins = sorted(e.label for e in spec.edges if e.direction == "in")
    outs = sorted(e.label for e in spec.edges if e.direction == "out")
    if ins and outs and rng.random() < notflowsfrom_prob:
        annotations.append(
            Annotation(rng.choice(ins), rng.choice(outs), NOT_FLOWS_FROM)
        )
    return annotations
