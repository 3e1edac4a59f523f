"""Randomized cross-check of the optimized solver against brute force.

Draws random annotated workflows small enough to enumerate exhaustively,
runs both solvers, and reports any disagreement in the answer-set family,
the entailed map, or the option sets. Exits nonzero on the first batch
with a mismatch.

Usage: python3 scripts/oracle_check.py [--runs N] [--seed S] [--max-pairs K]
"""

from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass

from depanno import brute_force_solve, solve, up_stream_pairs
from depanno.random_workflows import random_annotations, random_workflow

# keep 5^free enumerable; mirrors the test suite's sampling bounds
MAX_COMBOS = 20_000


@dataclass
class RunConfig:
    runs: int = 200
    seed: int = 0
    max_pairs: int = 10
    max_blocks: int = 6
    cycle_prob: float = 0.15


def sample_case(seed: int, config: RunConfig):
    rng = random.Random(seed)
    spec = random_workflow(
        rng, max_blocks=config.max_blocks, cycle_prob=config.cycle_prob
    )
    upstream = up_stream_pairs(spec)
    if len(upstream) > config.max_pairs:
        return None
    annotations = random_annotations(rng, spec)
    pinned = {a.pair for a in annotations}
    free = len(upstream) - len(pinned & upstream)
    if 5**free > MAX_COMBOS:
        return None
    return spec, annotations


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-pairs", type=int, default=10)
    args = parser.parse_args(argv)
    config = RunConfig(runs=args.runs, seed=args.seed, max_pairs=args.max_pairs)

    start = time.perf_counter()
    compared = 0
    skipped = 0
    inconsistent = 0
    mismatches = 0
    seed = config.seed
    while compared < config.runs:
        case = sample_case(seed, config)
        seed += 1
        if case is None:
            skipped += 1
            continue
        spec, annotations = case
        fast = solve(spec, annotations, max_models=MAX_COMBOS)
        slow = brute_force_solve(spec, annotations, cap=config.max_pairs)
        if not fast.consistent:
            inconsistent += 1
        same = (
            fast.answer_sets == slow.answer_sets
            and fast.entailed == slow.entailed
            and fast.options == slow.options
        )
        if not same:
            mismatches += 1
            print(f"MISMATCH at seed {seed - 1}:")
            print(f"  workflow: {spec.name}, pairs: {len(up_stream_pairs(spec))}")
            print(f"  solve: {len(fast.answer_sets)} sets, "
                  f"brute force: {len(slow.answer_sets)} sets")
        compared += 1
    elapsed = time.perf_counter() - start

    print(
        f"{compared} cases compared ({skipped} draws skipped as too large), "
        f"{inconsistent} inconsistent, {mismatches} mismatches, "
        f"{elapsed:.2f}s"
    )
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
