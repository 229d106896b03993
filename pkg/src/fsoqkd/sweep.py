"""Parameter sweeps, threshold search and protocol comparison.

Rows come out in canonical order (loss outermost, then eta, then p_nc) with
a fixed CSV schema, whatever the number of workers used to evaluate them.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable, Sequence, TextIO

from . import bbm92, e91, single_photon
from .bbm92 import EntangledSourceParams, SourcePlacement
from .channel import TABLE1_ROWS, total_transmittance
from .config import RunConfig
from .mathcore import BracketError, DomainError, bisect_root, db_to_transmittance, transmittance_to_db
from .single_photon import SingleProtocolKind

CSV_COLUMNS = ("protocol", "placement", "loss_db", "eta", "p_nc", "qber", "skr_bits_per_s", "s_chsh", "status")


class Protocol(str, Enum):
    BB84 = "bb84"
    SIX_STATE = "six-state"
    E91 = "e91"
    BBM92 = "bbm92"

    @property
    def single_kind(self) -> SingleProtocolKind | None:
        return {Protocol.BB84: SingleProtocolKind.BB84, Protocol.SIX_STATE: SingleProtocolKind.SIX_STATE}.get(self)

    @property
    def qber_threshold(self) -> float:
        if self.single_kind is not None:
            return self.single_kind.qber_threshold
        if self is Protocol.E91:
            return e91.qber_from_bell(2.0)
        return 0.11


def loss_grid(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise DomainError(f"loss step must be positive, got {step}")
    if stop < start or start < 0:
        raise DomainError(f"bad loss range [{start}, {stop}]")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


@dataclass(frozen=True)
class SweepSpec:
    protocol: Protocol
    loss_db: tuple[float, float, float] = (0.0, 45.0, 0.5)
    eta: tuple[float, ...] = (0.6,)
    p_nc: tuple[float, ...] = (1e-5,)
    fixed: RunConfig = field(default_factory=RunConfig)
    placement: SourcePlacement = SourcePlacement.AT_ALICE

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        object.__setattr__(self, "placement", SourcePlacement(self.placement))
        object.__setattr__(self, "eta", tuple(float(x) for x in self.eta))
        object.__setattr__(self, "p_nc", tuple(float(x) for x in self.p_nc))
        object.__setattr__(self, "loss_db", tuple(float(x) for x in self.loss_db))
        if not self.eta or not self.p_nc:
            raise DomainError("eta and p_nc lists must be non-empty")
        for eta in self.eta:
            if not (0.0 < eta <= 1.0):
                raise DomainError(f"eta must lie in (0, 1], got {eta}")
        for p in self.p_nc:
            if not (0.0 <= p < 1.0):
                raise DomainError(f"p_nc must lie in [0, 1), got {p}")
        loss_grid(*self.loss_db)

    @property
    def losses(self) -> list[float]:
        return loss_grid(*self.loss_db)

    @property
    def label(self) -> str:
        if self.protocol is Protocol.BBM92:
            return f"bbm92-{self.placement.value}"
        return self.protocol.value


@dataclass(frozen=True)
class ProtocolPoint:
    protocol: str
    placement: str
    loss_db: float
    eta: float
    p_nc: float
    qber: float
    skr: float
    s_chsh: float | None = None
    status: str = "ok"

    def as_row(self) -> dict:
        return {
            "protocol": self.protocol,
            "placement": self.placement,
            "loss_db": f"{self.loss_db:g}",
            "eta": f"{self.eta:g}",
            "p_nc": f"{self.p_nc:g}",
            "qber": "" if math.isnan(self.qber) else repr(self.qber),
            "skr_bits_per_s": repr(self.skr),
            "s_chsh": "" if self.s_chsh is None else repr(self.s_chsh),
            "status": self.status,
        }


def _source_for(cfg: RunConfig, eta: float) -> EntangledSourceParams:
    src = cfg.source
    return replace(src, eta=eta, r_c=eta**2 * src.eta_c**2 * src.r_1)


@dataclass(frozen=True)
class _Model:
    """QBER, signed key fraction and key rate of one (protocol, eta, p_nc) curve."""

    qber: Callable[[float], float]
    key_fraction: Callable[[float], float]
    point: Callable[[float], ProtocolPoint]


def _model(protocol: Protocol, placement: SourcePlacement, eta: float, p_nc: float, cfg: RunConfig) -> _Model:
    nu_s = cfg.source.nu_s
    placement_tag = placement.value if protocol is Protocol.BBM92 else ""

    def row(loss, qber, skr, s=None, status="ok"):
        return ProtocolPoint(protocol.value, placement_tag, loss, eta, p_nc, qber, skr, s, status)

    kind = protocol.single_kind
    if kind is not None:
        dev = replace(cfg.device, eta=eta, p_nc=p_nc)

        def qber(loss):
            return single_photon.qber_single(kind, dev, db_to_transmittance(loss))

        def frac(loss):
            return single_photon.key_fraction(kind, qber(loss))

        def point(loss):
            t = db_to_transmittance(loss)
            q = single_photon.qber_single(kind, dev, t)
            status = "saturated" if single_photon.is_saturated(q) else "ok"
            return row(loss, q, single_photon.skr_single(kind, q, t, nu_s), status=status)

        return _Model(qber, frac, point)

    if protocol is Protocol.E91:
        eta_t = eta * cfg.source.eta_c

        def chain(loss):
            arms = e91.ArmTransmittances.from_total(db_to_transmittance(loss), cfg.arm_split)
            diag = e91.bell_diagnostics(arms, eta_t, p_nc, cfg.analyzer)
            return diag, e91.qber_from_bell(diag.s_chsh)

        def frac(loss):
            diag, q = chain(loss)
            return e91.e91_key_fraction(q, diag.s_chsh)

        def point(loss):
            diag, q = chain(loss)
            s = diag.s_chsh
            status = "below_locality" if e91.below_locality(s) else "ok"
            return row(loss, q, e91.skr_e91(q, s, diag.p_s, nu_s), s, status)

        return _Model(lambda loss: chain(loss)[1], frac, point)

    src = _source_for(cfg, eta)
    fq = cfg.fq_table

    def qber(loss):
        return bbm92.qber_bbm92(src, db_to_transmittance(loss), placement, p_nc)

    def point(loss):
        t = db_to_transmittance(loss)
        q = bbm92.qber_bbm92(src, t, placement, p_nc)
        return row(loss, q, bbm92.skr_bbm92(q, t, src.nu_s, fq))

    return _Model(qber, lambda loss: bbm92.bbm92_key_fraction(qber(loss), fq), point)


def evaluate_point(
    protocol: Protocol | str,
    loss_db: float,
    eta: float,
    p_nc: float,
    cfg: RunConfig | None = None,
    placement: SourcePlacement | str = SourcePlacement.AT_ALICE,
) -> ProtocolPoint:
    """Evaluate one grid cell. Model errors become a flagged row instead of raising."""
    protocol = Protocol(protocol)
    placement = SourcePlacement(placement)
    cfg = cfg or RunConfig()
    try:
        return _model(protocol, placement, eta, p_nc, cfg).point(loss_db)
    except (ValueError, ZeroDivisionError) as exc:
        tag = placement.value if protocol is Protocol.BBM92 else ""
        return ProtocolPoint(protocol.value, tag, loss_db, eta, p_nc, math.nan, 0.0, None, f"error: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[ProtocolPoint]:
    cells = [(loss, eta, p) for loss in spec.losses for eta in spec.eta for p in spec.p_nc]

    def work(cell):
        loss, eta, p = cell
        return evaluate_point(spec.protocol, loss, eta, p, spec.fixed, spec.placement)

    if workers <= 1:
        return [work(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, cells))


def write_csv(points: Iterable[ProtocolPoint], stream: TextIO) -> None:
    w = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow(p.as_row())


def points_to_csv(points: Iterable[ProtocolPoint]) -> str:
    buf = io.StringIO()
    write_csv(points, buf)
    return buf.getvalue()


def write_gnuplot(points: Sequence[ProtocolPoint], column: str, stream: TextIO) -> None:
    """Two-column ``loss_db value`` blocks, one per (protocol, eta, p_nc), separated by blank lines."""
    if column not in ("qber", "skr", "s_chsh"):
        raise ValueError(f"unknown series column {column!r}")
    groups: dict[tuple, list[ProtocolPoint]] = {}
    for p in points:
        groups.setdefault((p.protocol, p.placement, p.eta, p.p_nc), []).append(p)
    first = True
    for (proto, placement, eta, p_nc), rows in groups.items():
        if not first:
            stream.write("\n\n")
        first = False
        name = f"{proto}-{placement}" if placement else proto
        stream.write(f"# {name} eta={eta:g} p_nc={p_nc:g} column={column}\n")
        for r in rows:
            v = getattr(r, column)
            stream.write(f"{r.loss_db:g} {'nan' if v is None else repr(v)}\n")


@dataclass(frozen=True)
class ThresholdResult:
    """Loss at which the key vanishes / the QBER crosses the protocol threshold.

    ``None`` means no crossing inside the swept range (reported as ">= ceiling").
    """

    protocol: str
    placement: str
    eta: float
    p_nc: float
    skr_zero_db: float | None
    qber_threshold_db: float | None
    qber_threshold: float
    floor_db: float
    ceiling_db: float
    note: str = ""

    @staticmethod
    def _fmt(v, ceiling):
        return f">= {ceiling:g}" if v is None else f"{v:.2f}"

    def describe(self) -> str:
        name = f"{self.protocol}-{self.placement}" if self.placement else self.protocol
        text = (
            f"{name} eta={self.eta:g} p_nc={self.p_nc:g}: "
            f"SKR=0 at {self._fmt(self.skr_zero_db, self.ceiling_db)} dB, "
            f"QBER={self.qber_threshold:.4f} at {self._fmt(self.qber_threshold_db, self.ceiling_db)} dB"
        )
        return text + (f" ({self.note})" if self.note else "")


def _crossing(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float | None:
    """Loss where ``f`` turns from positive to non-positive, or None if it never does."""
    if f(hi) > 0:
        return None
    try:
        return bisect_root(f, lo, hi, tol=tol)
    except BracketError:
        return lo


def find_threshold(spec: SweepSpec, tol_db: float = 1e-3) -> list[ThresholdResult]:
    lo, hi, _ = spec.loss_db
    out = []
    th = spec.protocol.qber_threshold
    for eta in spec.eta:
        for p_nc in spec.p_nc:
            m = _model(spec.protocol, spec.placement, eta, p_nc, spec.fixed)
            notes = []
            if m.key_fraction(lo) <= 0:
                notes.append("no key at range start")
            skr_zero = _crossing(m.key_fraction, lo, hi, tol_db)
            q_cross = _crossing(lambda loss: th - m.qber(loss), lo, hi, tol_db)
            tag = spec.placement.value if spec.protocol is Protocol.BBM92 else ""
            out.append(
                ThresholdResult(
                    spec.protocol.value, tag, eta, p_nc, skr_zero, q_cross, th, lo, hi, "; ".join(notes)
                )
            )
    return out


@dataclass(frozen=True)
class Comparison:
    labels: tuple[str, ...]
    losses: tuple[float, ...]
    skr: tuple[tuple[float, ...], ...]  # skr[i][j]: loss i, protocol j
    tolerances: dict
    crossovers: tuple[tuple[str, str, float], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["loss_db", *(f"skr_{label}" for label in self.labels)])
        for loss, row in zip(self.losses, self.skr):
            w.writerow([f"{loss:g}", *(repr(v) for v in row)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = []
        for label in self.labels:
            t = self.tolerances[label]
            lines.append(f"{label}: SKR reaches zero at {ThresholdResult._fmt(t.skr_zero_db, t.ceiling_db)} dB")
        if not self.crossovers:
            lines.append("no SKR crossover on this grid")
        for a, b, loss in self.crossovers:
            lines.append(f"SKR ordering of {a} and {b} flips at {loss:g} dB")
        return "\n".join(lines)


def compare_protocols(specs: Sequence[SweepSpec]) -> Comparison:
    """Align the SKR curves of several single-(eta, p_nc) sweeps on a shared loss grid."""
    if not specs:
        raise DomainError("nothing to compare")
    grid = specs[0].losses
    for s in specs:
        if s.losses != grid:
            raise DomainError(f"loss grid of {s.label} does not match {specs[0].label}")
        if len(s.eta) != 1 or len(s.p_nc) != 1:
            raise DomainError("compare_protocols needs a single eta and p_nc per sweep")
    labels = tuple(s.label for s in specs)
    if len(set(labels)) != len(labels):
        raise DomainError(f"duplicate protocol labels {labels}")
    columns = [[p.skr for p in run_sweep(s)] for s in specs]
    skr = tuple(tuple(col[i] for col in columns) for i in range(len(grid)))
    tolerances = {s.label: find_threshold(s)[0] for s in specs}

    crossovers = []
    for a in range(len(specs)):
        for b in range(a + 1, len(specs)):
            prev = 0
            for i, loss in enumerate(grid):
                d = columns[a][i] - columns[b][i]
                sign = (d > 0) - (d < 0)
                if sign and prev and sign != prev:
                    crossovers.append((labels[a], labels[b], loss))
                if sign:
                    prev = sign
    return Comparison(labels, tuple(grid), skr, tolerances, tuple(crossovers))


# Reference expected values, (QBER %, SKR bits/s), keyed by row label then protocol.
TABLE2_REFERENCE = {
    "10 m": {"bb84": (0.107, 3.11e5), "six-state": (0.105, 2.09e5), "bbm92": (5.18, 1.16e5), "e91": (0.006, 2.1e5)},
    "500 m": {"bb84": (0.125, 0.84e5), "six-state": (0.12, 0.57e5), "bbm92": (5.22, 0.31e5), "e91": (0.007, 1.8e5)},
    "30 km": {"bb84": (7.6, 86.0), "six-state": (5.21, 132.0), "bbm92": (5.24, 106.0), "e91": (7.17, 4.42)},
}
TABLE2_QBER_TOL_PP = 1.5
TABLE2_SKR_TOL_REL = 0.10


@dataclass(frozen=True)
class Table2Cell:
    length: str
    protocol: str
    quantity: str  # "qber_percent" or "skr_bits_per_s"
    computed: float
    reference: float
    note: str
    variant: str = ""

    @property
    def deviation(self) -> float:
        if self.quantity == "qber_percent":
            return self.computed - self.reference
        return (self.computed - self.reference) / self.reference

    @property
    def agrees(self) -> bool:
        return self.note == "agrees"


@dataclass(frozen=True)
class Table2Report:
    cells: tuple[Table2Cell, ...]
    extra: tuple[Table2Cell, ...]
    channel_losses_db: dict

    def render(self) -> str:
        lines = [
            "Expected QBER / SKR per protocol and channel length (eta=0.6, p_nc=1e-5)",
            f"{'length':<7} {'protocol':<10} {'quantity':<15} {'computed':>12} {'reference':>12} {'deviation':>11}  note",
        ]
        for c in (*self.cells, *self.extra):
            dev = f"{c.deviation:+.3f} pp" if c.quantity == "qber_percent" else f"{100 * c.deviation:+.1f} %"
            proto = c.protocol + (f"[{c.variant}]" if c.variant else "")
            lines.append(
                f"{c.length:<7} {proto:<10} {c.quantity:<15} {c.computed:>12.5g} {c.reference:>12.5g} {dev:>11}  {c.note}"
            )
        lines.append("channel losses: " + ", ".join(f"{k} {v:.3f} dB" for k, v in self.channel_losses_db.items()))
        return "\n".join(lines)


def _table2_cells(length, proto, point, reference, variant=""):
    q_pct = 100.0 * point.qber
    pq, ps = reference
    if abs(q_pct - pq) <= TABLE2_QBER_TOL_PP:
        q_note = "agrees"
    else:
        q_note = f"DISCREPANCY: {q_pct:.3g}% computed vs {pq}% reference"
    if abs(point.skr - ps) <= TABLE2_SKR_TOL_REL * ps:
        s_note = "agrees"
    else:
        s_note = f"DISCREPANCY: {point.skr:.3g} computed vs {ps:g} reference"
    return (
        Table2Cell(length, proto, "qber_percent", q_pct, pq, q_note, variant),
        Table2Cell(length, proto, "skr_bits_per_s", point.skr, ps, s_note, variant),
    )


def reproduce_table2(cfg: RunConfig | None = None, eta: float = 0.6, p_nc: float = 1e-5) -> Table2Report:
    """Recompute all 24 reference QBER/SKR cells and annotate every disagreement.

    BBM92 main cells use the Alice-side source; source-in-middle and the
    per-arm E91 split are listed as extra cells.
    """
    cfg = cfg or RunConfig()
    cells, extra, losses = [], [], {}
    for (label, params, _), length in zip(TABLE1_ROWS, TABLE2_REFERENCE):
        loss = transmittance_to_db(total_transmittance(params, cfg.alpha_unit))
        losses[length] = loss
        reference = TABLE2_REFERENCE[length]
        for proto in ("bb84", "six-state", "bbm92", "e91"):
            pt = evaluate_point(proto, loss, eta, p_nc, cfg, SourcePlacement.AT_ALICE)
            cells.extend(_table2_cells(length, proto, pt, reference[proto]))
        pt = evaluate_point("bbm92", loss, eta, p_nc, cfg, SourcePlacement.IN_MIDDLE)
        extra.extend(_table2_cells(length, "bbm92", pt, reference["bbm92"], "middle"))
        other = e91.ArmSplit.PER_ARM if cfg.arm_split is e91.ArmSplit.SQRT_TOTAL else e91.ArmSplit.SQRT_TOTAL
        pt = evaluate_point("e91", loss, eta, p_nc, replace(cfg, arm_split=other))
        extra.extend(_table2_cells(length, "e91", pt, reference["e91"], other.value))
    return Table2Report(tuple(cells), tuple(extra), losses)
