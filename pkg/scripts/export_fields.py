"""Write exact and computed fields of the benchmark problems as CSV for plotting.

    python3 scripts/export_fields.py OUTDIR [N]
"""

import sys
from pathlib import Path

from segsolve.benchmarks import example1, example2, example3
from segsolve.grid import write_csv
from segsolve.solver import SolveConfig, solve


def main(argv):
    out = Path(argv[0] if argv else "fields")
    n = int(argv[1]) if len(argv) > 1 else 40
    out.mkdir(parents=True, exist_ok=True)
    for factory in (example1, example2, example3):
        p = factory(n)
        # the implicit reaction keeps the square-root dynamics from cycling
        reaction = "implicit" if p.name == "example3" else "explicit"
        state, rep = solve(p, SolveConfig(max_iterations=16 * n * n, residual_tol=1e-12, reaction=reaction))
        for l in range(p.m):
            write_csv(out / f"{p.name}_u{l + 1}.csv", p.grid, state.values[l])
        write_csv(out / f"{p.name}_sum.csv", p.grid, state.total())
        if p.exact is not None:
            write_csv(out / f"{p.name}_exact_sum.csv", p.grid, p.exact_values().sum(axis=0))
        print(f"{p.name}: {rep.iterations} iterations, residual {rep.residual:.2e}")


if __name__ == "__main__":
    main(sys.argv[1:])
