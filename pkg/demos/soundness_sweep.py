"""Random programs against the oracle.

Generates loop-free tasks with demonic and probabilistic choice over three
inputs in {0, 1, 2}, proves the best bound it can for each, and compares it
with the exact worst case over all input valuations. Soundness means the
proved bound never exceeds the oracle; with case splitting on the inputs the
two coincide.

Run with ``python demos/soundness_sweep.py [N] [SEED]``.
"""

from __future__ import annotations

import random
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from gen import rand_task  # noqa: E402
from pdlverify.errors import EvalError  # noqa: E402
from pdlverify.parser import parse_task  # noqa: E402
from pdlverify.printer import format_task  # noqa: E402
from pdlverify.verify import oracle_minimum, oracle_task, verify_task  # noqa: E402


def main(n: int = 200, seed: int = 7) -> None:
    rng = random.Random(seed)
    tally: Counter[str] = Counter()
    example = None
    for _ in range(n):
        task = rand_task(rng)
        try:
            truth = oracle_minimum(oracle_task(task, 0))
        except EvalError:
            tally["skipped (runtime error)"] += 1
            continue
        split = verify_task(task, 0).verdict.max_provable
        symbolic = verify_task(task, 0, split_inputs=False).verdict.max_provable
        assert split <= truth and symbolic <= truth, format_task(task)
        tally["split exact" if split == truth else "split loose"] += 1
        if symbolic == truth:
            tally["symbolic exact"] += 1
        elif example is None:
            example = (task, symbolic, truth)
    print(f"{n} random tasks, seed {seed}")
    for key in sorted(tally):
        print(f"  {key}: {tally[key]}")
    if example is None:
        # symbolic leaves lose precision when their truth depends on an input value
        task = parse_task(MIRROR)
        example = (task, verify_task(task, split_inputs=False).verdict.max_provable,
                   oracle_minimum(oracle_task(task)))
    task, got, truth = example
    print(f"\na task where symbolic mode is loose ({got} proved, {truth} true):\n")
    print(format_task(task))


MIRROR = """\
@input n : int in [0..1]
@ensures x == 1
@prob 1/2
{ { x := n; } [1/2] { x := 1 - n; } }
"""


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
