#!/usr/bin/env python3
"""Print the link-budget table and the expected QBER/SKR table with annotations."""
import argparse

from fsoqkd.channel import AlphaUnit, reproduce_table1
from fsoqkd.config import load_config
from fsoqkd.sweep import reproduce_table2


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    args = ap.parse_args()
    cfg = load_config(args.config)

    for unit in AlphaUnit:
        print(f"link budget, alpha read as {unit.value}")
        for row in reproduce_table1(unit):
            print(f"  {row.label:<22} {row.computed_db:7.3f} dB  reference {row.reference_db:g} dB  {row.note}")
        print()

    report = reproduce_table2(cfg)
    print(report.render())
    bad = [c for c in report.cells if not c.agrees]
    print(f"\n{len(report.cells) - len(bad)} of {len(report.cells)} cells agree within tolerance")


if __name__ == "__main__":
    main()
