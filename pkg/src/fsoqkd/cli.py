"""Command-line entry point: ``fsoqkd <subcommand> [options]``."""
from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

from . import channel, e91, mc_oracle, sweep
from .bbm92 import SourcePlacement, accidental_rate
from .config import ConfigError, RunConfig, load_config, with_overrides
from .mathcore import db_to_transmittance, transmittance_to_db
from .single_photon import qber_single

PROTOCOLS = [p.value for p in sweep.Protocol]
PLACEMENTS = [p.value for p in SourcePlacement]

# CLI flag dest -> config key
_OVERRIDES = {
    "eta": "eta",
    "p_nc": "p_nc",
    "p_opt": "p_opt",
    "n_detectors": "n_detectors",
    "q": "q",
    "mu": "mu",
    "nu_s": "nu_s",
    "eta_c": "eta_c",
    "tau_c": "tau_c",
    "q_i": "q_i",
    "length_m": "length_m",
    "dt_mm": "d_t_mm",
    "dr_mm": "d_r_mm",
    "divergence_mrad": "divergence_mrad",
    "alpha": "alpha",
    "alpha_unit": "alpha_unit",
    "arm_split": "arm_split",
    "output": "output_path",
}


def _common(p: argparse.ArgumentParser, multi: bool = False) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="configuration file (default: $FSOQKD_CONFIG)")
    nargs = "+" if multi else None
    g.add_argument("--eta", type=float, nargs=nargs, help="detector efficiency")
    g.add_argument("--p-nc", type=float, nargs=nargs, help="noise-count probability per gate")
    g.add_argument("--p-opt", type=float)
    g.add_argument("--n-detectors", type=int)
    g.add_argument("--q", type=float, help="path-correction factor (0.5 or 1)")
    g.add_argument("--mu", type=float)
    g.add_argument("--nu-s", type=float, help="source brightness, counts/s")
    g.add_argument("--eta-c", type=float, help="collection efficiency")
    g.add_argument("--tau-c", type=float, help="coincidence window, s")
    g.add_argument("--q-i", type=float, help="intrinsic QBER")
    g.add_argument("--length-m", type=float)
    g.add_argument("--dt-mm", type=float)
    g.add_argument("--dr-mm", type=float)
    g.add_argument("--divergence-mrad", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--alpha-unit", choices=["natural", "db"])
    g.add_argument("--arm-split", choices=["sqrt_total", "per_arm"])
    g.add_argument("--output", help="write results here instead of stdout")


def _point_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", choices=PROTOCOLS, default="bb84")
    p.add_argument("--placement", choices=PLACEMENTS, default="alice")
    p.add_argument("--loss-db", type=float, help="channel loss; default: computed from the channel parameters")


def _grid_args(p: argparse.ArgumentParser, default_stop: float = 45.0) -> None:
    p.add_argument("--loss-start", type=float, default=0.0)
    p.add_argument("--loss-stop", type=float, default=default_stop)
    p.add_argument("--loss-step", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsoqkd", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("channel", help="channel loss from geometry and attenuation")
    _common(p)

    for name, text in (("qber", "QBER at one channel loss"), ("skr", "secret key rate at one channel loss")):
        p = sub.add_parser(name, help=text)
        _common(p)
        _point_args(p)

    p = sub.add_parser("bell", help="visibility factor and CHSH parameter")
    _common(p)
    p.add_argument("--loss-db", type=float)

    p = sub.add_parser("sweep", help="CSV sweep over loss x eta x p_nc")
    _common(p, multi=True)
    _point_args(p)
    _grid_args(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--gnuplot", choices=["qber", "skr", "s_chsh"], help="emit a two-column series instead of CSV")

    p = sub.add_parser("threshold", help="loss where the key vanishes")
    _common(p, multi=True)
    _point_args(p)
    _grid_args(p, default_stop=200.0)

    p = sub.add_parser("compare", help="align SKR curves of several protocols")
    _common(p)
    p.add_argument("--protocol", choices=PROTOCOLS, nargs="+", default=["bb84", "six-state"])
    p.add_argument("--placement", choices=PLACEMENTS, nargs="+", default=["alice"])
    _grid_args(p)

    p = sub.add_parser("table1", help="link-budget table: computed vs reference")
    _common(p)

    p = sub.add_parser("table2", help="QBER/SKR table: computed vs reference")
    _common(p)

    p = sub.add_parser("validate", help="Monte Carlo cross-check of the closed forms")
    _common(p)
    p.add_argument("--protocol", choices=["bb84", "six-state"], default="bb84")
    p.add_argument("--placement", choices=PLACEMENTS, default="alice")
    p.add_argument("--loss-db", type=float, default=20.0)
    p.add_argument("--bbm92-loss-db", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=10**7)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--noise-overrides-signal", action="store_true")
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {}
    for dest, key in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if isinstance(v, list):
            v = v[0]
        overrides[key] = v
    return with_overrides(cfg, **overrides)


def _loss(args, cfg: RunConfig) -> float:
    if getattr(args, "loss_db", None) is not None:
        return args.loss_db
    return channel.total_loss_db(cfg.channel, cfg.alpha_unit)


def _listed(args, name: str, fallback: float) -> tuple[float, ...]:
    v = getattr(args, name)
    return tuple(v) if v else (fallback,)


def cmd_channel(args, cfg, out):
    p = cfg.channel
    geo = channel.geometric_transmittance(p)
    atm = channel.atmospheric_transmittance(p.alpha, p.length, cfg.alpha_unit)
    t = geo * atm
    print(f"{transmittance_to_db(t):.2f} dB (T = {t:.6g})", file=out)
    print(f"geometric {transmittance_to_db(geo):.3f} dB, atmospheric {transmittance_to_db(atm):.3f} dB", file=out)


def cmd_point(args, cfg, out):
    loss = _loss(args, cfg)
    pt = sweep.evaluate_point(args.protocol, loss, cfg.device.eta, cfg.device.p_nc, cfg, args.placement)
    if args.cmd == "qber":
        print(f"QBER = {pt.qber:.6g} ({100 * pt.qber:.4g} %) at {loss:.3f} dB [{pt.status}]", file=out)
    else:
        print(f"SKR = {pt.skr:.6g} bits/s at {loss:.3f} dB (QBER {100 * pt.qber:.4g} %) [{pt.status}]", file=out)


def cmd_bell(args, cfg, out):
    loss = _loss(args, cfg)
    arms = e91.ArmTransmittances.from_total(db_to_transmittance(loss), cfg.arm_split)
    eta_t = cfg.device.eta * cfg.source.eta_c
    d = e91.bell_diagnostics(arms, eta_t, cfg.device.p_nc, cfg.analyzer)
    print(f"S_CHSH = {d.s_chsh:.4f} at {loss:.3f} dB", file=out)
    print(f"N = {d.n:.6g}, p_s = {d.p_s:.6g}, p_1 = {d.p_1:.6g}, p_0 = {d.p_0:.6g}", file=out)
    print(f"QBER (from S) = {e91.qber_from_bell(d.s_chsh):.6g}", file=out)


def _spec(args, cfg, protocol, placement="alice") -> sweep.SweepSpec:
    return sweep.SweepSpec(
        protocol=protocol,
        loss_db=(args.loss_start, args.loss_stop, args.loss_step),
        eta=_listed(args, "eta", cfg.device.eta),
        p_nc=_listed(args, "p_nc", cfg.device.p_nc),
        fixed=cfg,
        placement=placement,
    )


def cmd_sweep(args, cfg, out):
    points = sweep.run_sweep(_spec(args, cfg, args.protocol, args.placement), workers=args.workers)
    if args.gnuplot:
        sweep.write_gnuplot(points, args.gnuplot, out)
    else:
        sweep.write_csv(points, out)


def cmd_threshold(args, cfg, out):
    for r in sweep.find_threshold(_spec(args, cfg, args.protocol, args.placement)):
        print(r.describe(), file=out)


def cmd_compare(args, cfg, out):
    specs = []
    for proto in args.protocol:
        places = args.placement if proto == "bbm92" else ["alice"]
        specs.extend(_spec(args, cfg, proto, pl) for pl in places)
    cmp = sweep.compare_protocols(specs)
    out.write(cmp.to_csv())
    for line in cmp.summary().splitlines():
        print(f"# {line}", file=out)


def cmd_table1(args, cfg, out):
    for row in channel.reproduce_table1(cfg.alpha_unit):
        print(
            f"{row.label:<22} geometric {row.geometric_db:6.3f} dB  atmospheric {row.atmospheric_db:6.3f} dB  "
            f"total {row.computed_db:6.3f} dB  reference {row.reference_db:g} dB  {row.note}",
            file=out,
        )


def cmd_table2(args, cfg, out):
    print(sweep.reproduce_table2(cfg).render(), file=out)


def cmd_validate(args, cfg, out):
    proto = sweep.Protocol(args.protocol)
    t = db_to_transmittance(args.loss_db)
    sc = mc_oracle.SinglePhotonScenario(proto.single_kind, cfg.device, t, args.noise_overrides_signal)
    est = mc_oracle.simulate_single_photon(mc_oracle.McConfig(args.trials, args.seed, sc), workers=args.workers)
    analytic = qber_single(proto.single_kind, cfg.device, t)
    sigma = abs(est.qber_hat - analytic) / est.stderr if est.stderr else float("inf")
    print("check,analytic,empirical,ratio,sigma_distance", file=out)
    print(f"{proto.value}_qber@{args.loss_db:g}dB,{analytic:.6g},{est.qber_hat:.6g},{est.qber_hat / analytic:.4f},{sigma:.2f}", file=out)

    placement = SourcePlacement(args.placement)
    t2 = db_to_transmittance(args.bbm92_loss_db)
    sc2 = mc_oracle.Bbm92Scenario(cfg.source, placement, t2, cfg.device.p_nc)
    acc = mc_oracle.simulate_bbm92_accidentals(mc_oracle.McConfig(args.trials, args.seed, sc2), workers=args.workers)
    analytic2 = accidental_rate(cfg.source, t2, placement, cfg.device.p_nc)
    sigma2 = abs(acc.rate - analytic2) / acc.stderr if acc.stderr else float("inf")
    ratio2 = acc.rate / analytic2 if analytic2 else float("nan")
    print(
        f"bbm92_{placement.value}_accidentals@{args.bbm92_loss_db:g}dB,{analytic2:.6g},{acc.rate:.6g},{ratio2:.4f},{sigma2:.2f}",
        file=out,
    )


COMMANDS = {
    "channel": cmd_channel,
    "qber": cmd_point,
    "skr": cmd_point,
    "bell": cmd_bell,
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
    "compare": cmd_compare,
    "table1": cmd_table1,
    "table2": cmd_table2,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        with contextlib.ExitStack() as stack:
            if cfg.output_path:
                out = stack.enter_context(Path(cfg.output_path).open("w", newline=""))
            else:
                out = sys.stdout
            COMMANDS[args.cmd](args, cfg, out)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"fsoqkd {args.cmd}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
