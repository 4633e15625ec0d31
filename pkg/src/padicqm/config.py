"""Flat ``key = value`` scenario configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .padic_core import _check_prime, ord_p

SCENARIOS = ("two_slit", "ctqw", "collapse", "spectrum")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class Scan:
    t: float
    center: Fraction
    scale: int


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "two_slit"
    p: int = 3
    R: int = 1
    K: int = 3
    alpha: float = 1.0
    m_p: float = 0.5
    m_inf: float = 0.5
    omega: float = 1.0
    s: Fraction = Fraction(1)
    L: int = 2
    sigma: float = 0.5
    times: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    real_extent: float = 40.0
    real_spacing: float = 0.02
    refinement: str = "auto"
    matrix_path: str = ""
    matrix_format: str = "dense"
    gamma: float = 1.0
    level: int = 1
    sites: tuple[int, ...] = ()
    initial: str = "0"
    scans: tuple[Scan, ...] = ()
    seed: int = 0
    output_dir: str = ""

    def resolved_refinement(self) -> int | str:
        if self.refinement == "auto":
            return self.K + 4
        if self.refinement == "adaptive":
            return "adaptive"
        return int(self.refinement)

    def as_lines(self) -> list[str]:
        """Canonical ``key = value`` rendering (used in output headers)."""
        out = []
        for f in dataclasses.fields(self):
            out.append(f"{f.name} = {_render(getattr(self, f.name))}")
        return out


def _render(value) -> str:
    if isinstance(value, tuple):
        if value and isinstance(value[0], Scan):
            return "; ".join(f"{sc.t!r} {sc.center} {sc.scale}" for sc in value)
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _as_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _as_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None


def _as_fraction(key, raw):
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(key, f"expected a rational like 1/3, got {raw!r}") from None


def _as_scans(key, raw):
    scans = []
    for item in filter(None, (chunk.strip() for chunk in raw.split(";"))):
        parts = item.split()
        if len(parts) != 3:
            raise ConfigError(key, f"scan {item!r} must read 't center scale'")
        scans.append(Scan(_as_float(key, parts[0]), _as_fraction(key, parts[1]), _as_int(key, parts[2])))
    return tuple(scans)


_PARSERS = {
    "scenario": lambda k, v: v,
    "p": _as_int, "R": _as_int, "K": _as_int, "L": _as_int, "level": _as_int, "seed": _as_int,
    "alpha": _as_float, "m_p": _as_float, "m_inf": _as_float, "omega": _as_float,
    "sigma": _as_float, "real_extent": _as_float, "real_spacing": _as_float, "gamma": _as_float,
    "s": _as_fraction,
    "times": lambda k, v: tuple(_as_float(k, x) for x in v.split(",") if x.strip()),
    "sites": lambda k, v: tuple(_as_int(k, x) for x in v.split(",") if x.strip()),
    "refinement": lambda k, v: v,
    "matrix_path": lambda k, v: v,
    "matrix_format": lambda k, v: v,
    "initial": lambda k, v: v,
    "scans": _as_scans,
    "output_dir": lambda k, v: v,
}


def parse_config_text(text: str, scenario: str | None = None, base_dir: Path | None = None) -> ScenarioConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "given more than once")
        values[key] = _PARSERS[key](key, val)
    if scenario is not None:
        if values.get("scenario", scenario) != scenario:
            raise ConfigError("scenario", f"config is for {values['scenario']!r}, not {scenario!r}")
        values["scenario"] = scenario
    kind = values.get("scenario", "two_slit")
    if kind == "ctqw":
        values.setdefault("R", 0)
        values.setdefault("K", values.get("level", 1))
    if base_dir is not None and values.get("matrix_path"):
        mp = Path(values["matrix_path"])
        if not mp.is_absolute():
            values["matrix_path"] = str((base_dir / mp).resolve())
    cfg = ScenarioConfig(**values)
    validate(cfg)
    return cfg


def load_config(path: str | Path, scenario: str | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text, scenario, path.parent)


def validate(cfg: ScenarioConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}")
    try:
        _check_prime(cfg.p)
    except ValueError:
        raise ConfigError("p", f"{cfg.p} is not a prime") from None
    if cfg.R < 0:
        raise ConfigError("R", "must be nonnegative")
    if cfg.K < 0:
        raise ConfigError("K", "must be nonnegative")
    if cfg.R + cfg.K < 1:
        raise ConfigError("K", "R + K must be at least 1")
    if cfg.p ** (cfg.R + cfg.K) > 3**8:
        raise ConfigError("K", "window too large for dense quadrature (p^(R+K) > 6561)")
    for name in ("alpha", "m_p", "m_inf", "omega", "sigma", "real_extent", "real_spacing"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, "must be positive")
    if not cfg.times:
        raise ConfigError("times", "at least one time is required")
    if cfg.refinement not in ("auto", "adaptive"):
        try:
            m = int(cfg.refinement)
        except ValueError:
            raise ConfigError("refinement", "must be 'auto', 'adaptive' or an integer") from None
        if m < cfg.K:
            raise ConfigError("refinement", "must be at least K")
    if cfg.scenario in ("two_slit", "collapse"):
        _validate_slits(cfg)
    if cfg.scenario == "collapse":
        if not cfg.scans:
            raise ConfigError("scans", "collapse needs at least one scan")
        if any(b.t < a.t for a, b in zip(cfg.scans, cfg.scans[1:])):
            raise ConfigError("scans", "scan times must be nondecreasing")
        for sc in cfg.scans:
            if sc.scale < -cfg.R or sc.scale > cfg.K or (sc.center and ord_p(sc.center, cfg.p) < -cfg.R):
                raise ConfigError("scans", f"ball {sc.center}+p^{sc.scale}Z_p is outside the window")
    if cfg.scenario == "ctqw":
        if cfg.R != 0:
            raise ConfigError("R", "ctqw runs on Z_p, so R must be 0")
        if cfg.level < 1:
            raise ConfigError("level", "must be a positive integer")
        if cfg.K < cfg.level:
            raise ConfigError("K", "must be at least the kernel level")
        if not cfg.matrix_path:
            raise ConfigError("matrix_path", "ctqw needs a matrix file")
        if cfg.matrix_format not in ("dense", "edges"):
            raise ConfigError("matrix_format", "must be 'dense' or 'edges'")


def _validate_slits(cfg: ScenarioConfig) -> None:
    p, s, L = cfg.p, cfg.s, cfg.L
    if s == 0:
        raise ConfigError("s", "must be nonzero")
    if L < 1:
        raise ConfigError("L", "must be a positive integer")
    # slits s + p^L Z_p and -s + p^L Z_p are disjoint iff |2s|_p > p^-L
    if ord_p(2 * s, p) >= L:
        raise ConfigError("s", f"slit balls overlap: |2s|_{p} <= {p}^-{L}")
    if ord_p(s, p) < -cfg.R:
        raise ConfigError("s", f"slit lies outside the domain {p}^-{cfg.R}Z_{p}")
    if L > cfg.K:
        raise ConfigError("L", "slit width is finer than the window resolution K")


__all__ = ["ConfigError", "Scan", "ScenarioConfig", "SCENARIOS", "load_config", "parse_config_text", "validate"]
