#!/usr/bin/env python3
"""Monte Carlo QBER and accidental rates against the closed forms over a loss grid.

Prints CSV: check, loss_db, analytic, empirical, ratio, sigma_distance.
Both noise conventions are run for the single-photon protocols.
"""
import argparse
import sys

from fsoqkd.bbm92 import SourcePlacement, accidental_rate
from fsoqkd.config import load_config
from fsoqkd.mathcore import db_to_transmittance
from fsoqkd.mc_oracle import Bbm92Scenario, McConfig, SinglePhotonScenario, simulate_bbm92_accidentals, simulate_single_photon
from fsoqkd.single_photon import SingleProtocolKind, qber_single


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--trials", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--losses", type=float, nargs="+", default=[0, 10, 20, 25, 30])
    args = ap.parse_args()
    cfg = load_config(args.config)
    out = sys.stdout
    print("check,loss_db,analytic,empirical,ratio,sigma_distance", file=out)

    for kind in SingleProtocolKind:
        for override in (False, True):
            tag = f"{kind.name.lower().replace('_', '-')}{'_override' if override else ''}"
            for loss in args.losses:
                t = db_to_transmittance(loss)
                sc = SinglePhotonScenario(kind, cfg.device, t, override)
                est = simulate_single_photon(McConfig(args.trials, args.seed, sc), workers=args.workers)
                ref = qber_single(kind, cfg.device, t)
                print(
                    f"{tag},{loss:g},{ref:.6g},{est.qber_hat:.6g},{est.qber_hat / ref:.4f},"
                    f"{abs(est.qber_hat - ref) / est.stderr:.2f}",
                    file=out,
                )

    for placement in SourcePlacement:
        for loss in (0, 3, 10):
            t = db_to_transmittance(loss)
            sc = Bbm92Scenario(cfg.source, placement, t, cfg.device.p_nc)
            est = simulate_bbm92_accidentals(McConfig(args.trials, args.seed, sc), workers=args.workers)
            ref = accidental_rate(cfg.source, t, placement, cfg.device.p_nc)
            sigma = abs(est.rate - ref) / est.stderr if est.stderr else float("nan")
            print(f"bbm92_{placement.value}_accidentals,{loss:g},{ref:.6g},{est.rate:.6g},{est.rate / ref:.4f},{sigma:.2f}", file=out)


if __name__ == "__main__":
    main()
