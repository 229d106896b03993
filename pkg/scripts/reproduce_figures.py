#!/usr/bin/env python3
"""Write the CSV sweeps behind the QBER/SKR-versus-loss curves.

One file per curve family:

    bb84.csv, six-state.csv         eta x p_nc grid, 0-45 dB
    bb84_vs_six-state.csv           eta=0.6, p_nc=1e-5 comparison
    bell.csv                        S_CHSH vs loss (E91 sweep, s_chsh column)
    e91.csv                         eta sweep at p_nc=1e-5 and p_nc sweep at eta=0.6
    bbm92-alice.csv, bbm92-middle.csv
    bbm92_placements.csv            Alice-side vs middle comparison

Usage: python scripts/reproduce_figures.py OUTDIR [--config run.ini]
"""
import argparse
from pathlib import Path

from fsoqkd.config import load_config
from fsoqkd.sweep import SweepSpec, compare_protocols, run_sweep, write_csv

ETAS = (0.4, 0.6, 0.8)
PNCS = (1e-5, 1e-4, 1e-3)


def dump(points, path):
    with path.open("w", newline="") as fh:
        write_csv(points, fh)
    print(f"wrote {path} ({len(points)} rows)")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--config")
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    cfg = load_config(args.config)
    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)

    for proto in ("bb84", "six-state"):
        dump(run_sweep(SweepSpec(proto, (0, 45, 0.5), ETAS, PNCS, cfg), args.workers), out / f"{proto}.csv")

    cmp = compare_protocols([SweepSpec(p, (0, 45, 0.5), fixed=cfg) for p in ("bb84", "six-state")])
    (out / "bb84_vs_six-state.csv").write_text(cmp.to_csv())
    print(cmp.summary())

    bell = run_sweep(SweepSpec("e91", (0, 100, 1), ETAS, PNCS, cfg), args.workers)
    dump(bell, out / "bell.csv")
    e91 = run_sweep(SweepSpec("e91", (0, 80, 0.5), ETAS, (1e-5,), cfg), args.workers)
    e91 += run_sweep(SweepSpec("e91", (0, 80, 0.5), (0.6,), PNCS, cfg), args.workers)
    dump(e91, out / "e91.csv")

    specs = []
    for placement, stop in (("alice", 80), ("middle", 140)):
        spec = SweepSpec("bbm92", (0, stop, 0.5), ETAS, PNCS, cfg, placement)
        dump(run_sweep(spec, args.workers), out / f"{spec.label}.csv")
        specs.append(SweepSpec("bbm92", (0, 140, 0.5), fixed=cfg, placement=placement))
    cmp = compare_protocols(specs)
    (out / "bbm92_placements.csv").write_text(cmp.to_csv())
    print(cmp.summary())


if __name__ == "__main__":
    main()
