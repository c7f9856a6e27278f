"""Monty Hall, end to end.

The host hides the prize behind a door chosen adversarially, the player
picks uniformly at random, the host opens an empty door and the player
switches. We prove that switching wins with probability at least 2/3 against
every hiding strategy, look at the constraints the proof produced, and check
the bound against the exact MDP oracle.

Run with ``python demos/monty_hall_walkthrough.py``.
"""

from __future__ import annotations

from pathlib import Path

from pdlverify.constraints import TargetLB
from pdlverify.engine import format_tree
from pdlverify.parser import parse_task
from pdlverify.verify import oracle_task, verify_task

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def section(title: str) -> None:
    print(f"\n== {title} ==")


def main() -> None:
    source = (CORPUS / "monty_hall_demonic_open.pgcl").read_text()
    task = parse_task(source)

    section("the task")
    print(source.strip())

    section("proving the claimed bound")
    res = verify_task(task)
    v = res.verdict
    print(f"status {v.status}: claimed {v.claimed}, best provable {v.max_provable}")

    section("first lines of the proof tree")
    # the tree is long; the top shows the demonic prize placement and the
    # player's random pick
    for line in format_tree(res.tree).splitlines()[:12]:
        print(line[:110])

    section("constraints on the path prize=0, choice=0")
    # p0 is the prize-behind-door-0 branch, p00 the player picking door 0
    interesting = {"p", "p0", "p00", "p000"}
    for c in res.constraints:
        if str(c.var) in interesting and not isinstance(c, TargetLB):
            print(" ", c)
    print("  switching away from the prize loses, so the leaf is pinned to 0")

    section("solver")
    sol = res.solution.max_assignment
    print("maximal values:", ", ".join(f"{k}={sol[k]}" for k in sorted(sol)[:6]), "...")

    section("cross-check with the MDP oracle")
    for run in oracle_task(task):
        r = run.result
        print(f"{dict(run.valuation)}: exact worst case {r.lower_bound} (residual {r.residual_mass})")

    section("and without switching")
    stay = parse_task((CORPUS / "monty_hall_demonic_open_noswitch.pgcl").read_text())
    v2 = verify_task(stay).verdict
    print(f"status {v2.status}: claimed {v2.claimed}, best provable {v2.max_provable}")


if __name__ == "__main__":
    main()
