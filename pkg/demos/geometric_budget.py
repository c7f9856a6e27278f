"""Loops under a finite unroll budget.

A fair coin is flipped until heads. The loop terminates almost surely, but
the prover only unfolds it a bounded number of times; whatever mass is still
looping when the budget runs out is counted as failure. The provable bound
therefore climbs as 1 - 2^-b and never reaches 1, while the oracle brackets
the true value in [lower, lower + residual].

Run with ``python demos/geometric_budget.py``.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from pdlverify.parser import parse_task
from pdlverify.verify import oracle_task, verify_task

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def main() -> None:
    almost = parse_task((CORPUS / "geometric.pgcl").read_text())
    certain = parse_task((CORPUS / "geometric_one.pgcl").read_text())
    print(f"claim A: P(heads eventually) >= {almost.prob}")
    print(f"claim B: P(heads eventually) >= {certain.prob}\n")

    print(f"{'budget':>6}  {'provable':>12}  {'oracle interval':>26}  {'A':>17}  {'B':>13}")
    for b in (0, 1, 2, 4, 8, 9, 10, 16):
        va = verify_task(almost, b).verdict
        vb = verify_task(certain, b).verdict
        [run] = oracle_task(almost, b)
        lo, hi = run.result.lower_bound, run.result.upper_bound
        assert va.max_provable == 1 - Fraction(1, 2 ** b) == lo
        print(f"{b:>6}  {str(va.max_provable):>12}  {f'[{lo}, {hi}]':>26}  "
              f"{va.status:>17}  {vb.status:>13}")

    print("\nA is proved from budget 10 on; B stays inconclusive at every budget,")
    print("which is the sound outcome: truncation never manufactures probability.")


if __name__ == "__main__":
    main()
