"""Run configuration: one INI file plus ``section.key=value`` overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .ingest import DEFAULT_MAX_FLAT_RUN, DEFAULT_STALE_FRACTION, GICS_SECTORS
from .scaling import DEFAULT_KS
from .spectral import parse_days
from .synth import SynthSpec


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    output: Path
    seed: int = 0
    quotes: Path | None = None
    sectors: Path | None = None
    index: Path | None = None
    panel: Path | None = None
    delimiter: str = ","
    stale_fraction: float = DEFAULT_STALE_FRACTION
    max_flat_run: int = DEFAULT_MAX_FLAT_RUN
    width: int = 7 * 252
    step: int = 252
    centers: list[int] | None = None
    smooth_days: int = 252
    ks: tuple[int, ...] = DEFAULT_KS
    phase_width: int = 5 * 252
    phase_step: int = 252
    risk_threshold: float = 1.0
    leader_thresholds: tuple[float, ...] = (1.3, 1.39)
    permutations: int = 100
    quantile: float = 0.95
    synth: SynthSpec = field(default_factory=SynthSpec)

    def __post_init__(self):
        if self.panel is None:
            self.panel = self.output / "panel"
        if not self.width >= self.step >= 1:
            raise ConfigError(f"need width >= step >= 1 (width={self.width}, step={self.step})")
        if not self.phase_width >= self.phase_step >= 1:
            raise ConfigError("need phase width >= phase step >= 1")

    def require(self, *names: str) -> None:
        for name in names:
            path = getattr(self, name)
            if path is None:
                raise ConfigError(f"missing required path '{name}'")
            if not Path(path).exists():
                raise ConfigError(f"{name} path does not exist: {path}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(";", ",").split(",") if x.strip())


def load_config(path, overrides=()) -> RunConfig:
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with path.open(encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, option = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, value.strip())
    try:
        return _build(parser, path.parent)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc


def _build(p: configparser.ConfigParser, base: Path) -> RunConfig:
    def get(section, key, default=None):
        if p.has_option(section, key):
            value = p.get(section, key).strip()
            return value if value != "" else default
        return default

    def path(section, key):
        value = get(section, key)
        if value is None:
            return None
        candidate = Path(value)
        return candidate if candidate.is_absolute() else base / candidate

    output = path("run", "output") or base / "output"
    seed = int(get("run", "seed", 0))
    centers = get("analyze", "centers")
    sector_names = get("synth", "sectors")
    sector_set = (
        tuple(s.strip() for s in sector_names.split(",")) if sector_names else GICS_SECTORS
    )
    synth = SynthSpec(
        n_firms=int(get("synth", "n_firms", 120)),
        n_days=int(parse_days(get("synth", "n_days", 4032))),
        gamma_m=float(get("synth", "gamma_m", 0.6)),
        gamma=get("synth", "gamma", "uniform(0.5, 1.0)"),
        beta0=get("synth", "beta0", "ones"),
        seed=int(get("synth", "seed", seed)),
        sector_set=sector_set,
        start_date=get("synth", "start_date", "1990-01-02"),
        planted_sector=get("synth", "planted_sector"),
        planted_days=int(parse_days(get("synth", "planted_days", 0))),
        planted_beta_scale=float(get("synth", "planted_beta_scale", 1.5)),
        planted_volume_scale=float(get("synth", "planted_volume_scale", 3.0)),
    )
    return RunConfig(
        output=output,
        seed=seed,
        quotes=path("input", "quotes"),
        sectors=path("input", "sectors"),
        index=path("input", "index"),
        panel=path("input", "panel"),
        delimiter=get("input", "delimiter", ","),
        stale_fraction=float(get("ingest", "stale_fraction", DEFAULT_STALE_FRACTION)),
        max_flat_run=int(get("ingest", "max_flat_run", DEFAULT_MAX_FLAT_RUN)),
        width=parse_days(get("analyze", "width", "7y")),
        step=parse_days(get("analyze", "step", "1y")),
        centers=list(_ints(centers)) if centers else None,
        smooth_days=parse_days(get("analyze", "smooth_days", "1y")),
        ks=_ints(get("scaling", "ks", ",".join(map(str, DEFAULT_KS)))),
        phase_width=parse_days(get("phase", "width", "5y")),
        phase_step=parse_days(get("phase", "step", "1y")),
        risk_threshold=float(get("phase", "risk_threshold", 1.0)),
        leader_thresholds=_floats(get("phase", "leader_thresholds", "1.3, 1.39")),
        permutations=int(get("phase", "permutations", 100)),
        quantile=float(get("phase", "quantile", 0.95)),
        synth=synth,
    )
