"""Run the benchmark tables and print each next to its reference errors.

    python3 scripts/reproduce_tables.py               # all tables
    python3 scripts/reproduce_tables.py 1 5 --full-h  # a selection
"""

import argparse
import time

from bcsplit.harness import emit_report, run_plan
from bcsplit.tables import TABLES, get_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("tables", nargs="*", type=int, default=sorted(TABLES))
    parser.add_argument("--full-h", action="store_true", help="h=2.5e-4 for tables 2 and 4")
    args = parser.parse_args()

    for n in args.tables:
        spec = get_table(n)
        plan = spec.plan_for(args.full_h)
        start = time.perf_counter()
        report = run_plan(plan)
        took = time.perf_counter() - start
        print(f"Table {n}: {plan.problem}, {plan.method}, h={plan.h:g}, T={plan.T:g}, {plan.backend} ({took:.1f}s)")
        print(emit_report(report, "pretty"), end="")
        print("reference local  " + "  ".join(f"{x:.4e}" for x in spec.local_ref))
        print("reference global " + "  ".join(f"{x:.4e}" for x in spec.global_ref))
        print()


if __name__ == "__main__":
    main()
