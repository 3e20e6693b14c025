"""Print the R_{N,M} error table for the three-phase problem with an exact solution.

    python3 scripts/reproduce_table.py            # N = 10, 20, 40
    python3 scripts/reproduce_table.py 10 20 40 80
"""

import sys

from segsolve.benchmarks import DESK_N, M_RULES, example2, table


def main(argv):
    ns = tuple(int(a) for a in argv) or DESK_N
    tab = table(example2(), ns=ns, rules=M_RULES)
    sys.stdout.write(tab.to_text())


if __name__ == "__main__":
    main(sys.argv[1:])
