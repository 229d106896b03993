"""Run configuration: INI-style parsing, defaults and rendering.

Every key name is unique across sections, so section headers are optional.
Keys placed before any header are accepted as long as they are known; keys
under a header must belong to that header's section::

    eta = 0.4

    [channel]
    length_m = 500
    d_r_mm = 12
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .bbm92 import DEFAULT_FQ, EntangledSourceParams, ErrorCorrectionEfficiency
from .channel import AlphaUnit, ChannelParams
from .e91 import AnalyzerConfig, ArmSplit
from .mathcore import DomainError
from .single_photon import DeviceParams

CONFIG_ENV_VAR = "FSOQKD_CONFIG"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams = field(default_factory=ChannelParams)
    device: DeviceParams = field(default_factory=DeviceParams)
    source: EntangledSourceParams = field(default_factory=EntangledSourceParams)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    fq_table: ErrorCorrectionEfficiency = DEFAULT_FQ
    alpha_unit: AlphaUnit = AlphaUnit.NATURAL
    arm_split: ArmSplit = ArmSplit.SQRT_TOTAL
    output_path: str | None = None


def _angles(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _fq(text: str) -> ErrorCorrectionEfficiency:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        q, f = item.split(":")
        pairs.append((float(q), float(f)))
    return ErrorCorrectionEfficiency(pairs)


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _optional_path(text: str) -> str | None:
    return text or None


# key -> (section, target, attribute, parser)
KEYS: dict[str, tuple[str, str, str, object]] = {
    "d_t_mm": ("channel", "channel", "d_t", float),
    "d_r_mm": ("channel", "channel", "d_r", float),
    "divergence_mrad": ("channel", "channel", "divergence", float),
    "alpha": ("channel", "channel", "alpha", float),
    "length_m": ("channel", "channel", "length", float),
    "eta": ("device", "device", "eta", float),
    "p_nc": ("device", "device", "p_nc", float),
    "p_opt": ("device", "device", "p_opt", float),
    "n_detectors": ("device", "device", "n", _int),
    "q": ("device", "device", "q", float),
    "mu": ("device", "device", "mu", float),
    "nu_s": ("source", "source", "nu_s", float),
    "r_1": ("source", "source", "r_1", float),
    "r_2": ("source", "source", "r_2", float),
    "r_c": ("source", "source", "r_c", float),
    "tau_c": ("source", "source", "tau_c", float),
    "q_i": ("source", "source", "q_i", float),
    "eta_c": ("source", "source", "eta_c", float),
    "theta_a": ("analyzer", "analyzer", "theta_a", _angles),
    "theta_b": ("analyzer", "analyzer", "theta_b", _angles),
    "phi": ("analyzer", "analyzer", "phi", float),
    "fq_table": ("run", "run", "fq_table", _fq),
    "alpha_unit": ("run", "run", "alpha_unit", AlphaUnit),
    "arm_split": ("run", "run", "arm_split", ArmSplit),
    "output_path": ("run", "run", "output_path", _optional_path),
}
SECTIONS = ("run", "channel", "device", "source", "analyzer")
_TOP = "__top__"


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) to the 1-based line where the key appears."""
    index = {}
    section = _TOP
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", line)
        if m:
            section = m.group(1).strip().lower()
            index.setdefault((section, ""), lineno)
            continue
        m = re.match(r"([^=:]+?)\s*[=:]", line)
        if m:
            index.setdefault((section, m.group(1).strip().lower()), lineno)
    return index


def parse_config(text: str) -> RunConfig:
    """Parse a configuration document; omitted keys take the standard defaults."""
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, default_section="__defaults_unused__")
    try:
        cp.read_string(f"[{_TOP}]\n" + text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], None if line is None else line - 1) from exc

    values: dict[str, object] = {}
    for section in cp.sections():
        if section != _TOP and section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, "")))
        for key, raw in cp.items(section):
            line = lines.get((section, key))
            if key not in KEYS:
                raise ConfigError(f"unknown key {key!r}", line)
            home = KEYS[key][0]
            if section not in (_TOP, home):
                raise ConfigError(f"key {key!r} belongs in [{home}], not [{section}]", line)
            if key in values:
                raise ConfigError(f"duplicate key {key!r}", line)
            try:
                values[key] = KEYS[key][3](raw.strip())
            except (ValueError, DomainError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line) from exc

    def line_of(key):
        return lines.get((_TOP, key)) or lines.get((KEYS[key][0], key))

    def build(target: str, cls, extra=None):
        kwargs = dict(extra or {})
        for key, (_, tgt, attr, _) in KEYS.items():
            if tgt == target and key in values:
                kwargs[attr] = values[key]
        try:
            return cls(**kwargs)
        except DomainError as exc:
            keys = [k for k, v in KEYS.items() if v[1] == target and k in values]
            raise ConfigError(str(exc), line_of(keys[0]) if keys else None) from exc

    channel = build("channel", ChannelParams)
    device = build("device", DeviceParams)
    analyzer = build("analyzer", AnalyzerConfig)

    # source defaults follow the device efficiency: r_1 = r_2 = nu_s and
    # r_c = eta^2 * eta_c^2 * r_1 unless given explicitly
    nu_s = values.get("nu_s", 0.64e6)
    eta_c = values.get("eta_c", 0.6)
    r_1 = values.get("r_1", nu_s)
    src_extra = {
        "eta": device.eta,
        "r_1": r_1,
        "r_2": values.get("r_2", nu_s),
        "r_c": values.get("r_c", device.eta**2 * eta_c**2 * r_1),
    }
    source = build("source", EntangledSourceParams, src_extra)

    run = {k: values[k] for k in ("fq_table", "alpha_unit", "arm_split", "output_path") if k in values}
    return RunConfig(channel=channel, device=device, source=source, analyzer=analyzer, **run)


def render_config(cfg: RunConfig) -> str:
    """Write every field explicitly, so ``parse_config(render_config(c)) == c``."""
    obj = {"channel": cfg.channel, "device": cfg.device, "source": cfg.source, "analyzer": cfg.analyzer}
    out = []
    for section in SECTIONS:
        out.append(f"[{section}]")
        for key, (home, target, attr, _) in KEYS.items():
            if home != section:
                continue
            if target == "run":
                v = getattr(cfg, attr)
                if attr == "fq_table":
                    text = ", ".join(f"{q!r}:{f!r}" for q, f in v.table)
                elif attr == "output_path":
                    text = v or ""
                else:
                    text = v.value
            else:
                v = getattr(obj[target], attr)
                if isinstance(v, tuple):
                    text = " ".join(repr(x) for x in v)
                else:
                    text = repr(v)
            out.append(f"{key} = {text}")
        out.append("")
    return "\n".join(out)


def load_config(path: str | os.PathLike | None = None) -> RunConfig:
    """Load from ``path``, else from ``$FSOQKD_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return RunConfig()
    return parse_config(Path(path).read_text())


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply config-key overrides (CLI flags), re-deriving ``r_c`` when eta changes."""
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return cfg
    unknown = set(overrides) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    groups: dict[str, dict] = {}
    for key, v in overrides.items():
        groups.setdefault(KEYS[key][1], {})[KEYS[key][2]] = v
    try:
        device = replace(cfg.device, **groups.get("device", {}))
        channel = replace(cfg.channel, **groups.get("channel", {}))
        analyzer = replace(cfg.analyzer, **groups.get("analyzer", {}))
        src_changes = dict(groups.get("source", {}))
        src_changes["eta"] = device.eta
        if "r_c" not in src_changes:
            eta_c = src_changes.get("eta_c", cfg.source.eta_c)
            r_1 = src_changes.get("r_1", cfg.source.r_1)
            src_changes["r_c"] = device.eta**2 * eta_c**2 * r_1
        source = replace(cfg.source, **src_changes)
        run = groups.get("run", {})
        return replace(cfg, channel=channel, device=device, source=source, analyzer=analyzer, **run)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

