"""Regenerate the regression files in tests/data.

Run once after an intentional change to the iteration; the test suite
compares fresh runs against these files byte for byte.
"""

import json
from pathlib import Path

from segsolve.benchmarks import example1, example2, example3, zero_set_size
from segsolve.grid import write_csv
from segsolve.solver import SolveConfig, solve
from segsolve.twophase import TwoPhaseProblem, solve_twophase

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def main():
    DATA.mkdir(parents=True, exist_ok=True)

    tp = TwoPhaseProblem.from_spec(example1(50))
    w, _ = solve_twophase(tp, SolveConfig(max_iterations=1500))
    write_csv(DATA / "example1_n50_m1500.csv", tp.grid, w.values)

    p3 = example3(80)
    s3, _ = solve(p3, SolveConfig(max_iterations=3200))
    write_csv(DATA / "example3_n80_m3200.csv", p3.grid, s3.total())

    s2, _ = solve(example2(80), SolveConfig(max_iterations=3200))
    counts = {"N": 80, "M": 3200, "example2": zero_set_size(s2.values), "example3": zero_set_size(s3.values)}
    (DATA / "zero_sets.json").write_text(json.dumps(counts, indent=2) + "\n")
    print(counts)


if __name__ == "__main__":
    main()
