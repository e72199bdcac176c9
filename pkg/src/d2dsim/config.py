"""Radio constants and simulation plans, plus the key=value config format.

Defaults reproduce the standard parameter set (tri-sector 500 m cell,
r=6 RBs per grant, 180 kHz RBs, 43/24/21 dBm powers, -106 dBm noise).
"""

import math
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Raised for unparseable, unknown, or out-of-range config input."""


@dataclass(frozen=True)
class RadioConfig:
    p_bs_dbm: float = 43.0
    p_cell_max_dbm: float = 24.0
    p_d2d_max_dbm: float = 21.0
    noise_dbm: float = -106.0
    rb_bandwidth_hz: float = 180_000.0
    n_rb: int = 6
    d0_m: float = 20.0
    dmax_m: float = 50.0
    fc_mhz: float = 2000.0
    sinr_threshold_db: float = 0.0
    bs_power_division: str = "literal"
    a2_rb_demand: int = 3

    def __post_init__(self):
        for key in ("p_bs_dbm", "p_cell_max_dbm", "p_d2d_max_dbm", "noise_dbm"):
            v = getattr(self, key)
            # -inf dBm means a silenced transmitter and is allowed in tests
            if math.isnan(v) or v == math.inf:
                raise ConfigError(f"{key} must not be NaN or +inf")
        if self.n_rb < 2:
            raise ConfigError("n_rb must be >= 2")
        if self.rb_bandwidth_hz <= 0:
            raise ConfigError("rb_bandwidth_hz must be > 0")
        if self.d0_m <= 0:
            raise ConfigError("d0_m must be > 0")
        if not self.d0_m < self.dmax_m:
            raise ConfigError("d0_m must be < dmax_m")
        if self.fc_mhz <= 0:
            raise ConfigError("fc_mhz must be > 0")
        if self.bs_power_division not in ("literal", "per_rb"):
            raise ConfigError("bs_power_division must be 'literal' or 'per_rb'")
        if not 1 <= self.a2_rb_demand <= self.n_rb - 1:
            raise ConfigError("a2_rb_demand must be in [1, n_rb - 1]")


@dataclass(frozen=True)
class SimulationPlan:
    n_users: int = 30
    radius_m: float = 500.0
    q: int = 5
    seed: int = 1
    mode: str = "sbrra"
    sectored: bool = True
    demand_script: str | None = None
    replications: int = 1

    def __post_init__(self):
        if self.n_users < 0:
            raise ConfigError("n_users must be >= 0")
        if self.radius_m <= 0:
            raise ConfigError("radius_m must be > 0")
        if self.q < 1:
            raise ConfigError("q must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.mode not in ("sbrra", "hmm"):
            raise ConfigError("mode must be 'sbrra' or 'hmm'")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")


def _parse_float(s):
    v = float(s)
    return v


def _parse_int(s):
    return int(s, 10)


def _parse_bool(s):
    if s in ("true", "1", "yes"):
        return True
    if s in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_str(s):
    return s


def _parse_optional_path(s):
    return s or None


_RADIO_PARSERS = {
    "p_bs_dbm": _parse_float,
    "p_cell_max_dbm": _parse_float,
    "p_d2d_max_dbm": _parse_float,
    "noise_dbm": _parse_float,
    "rb_bandwidth_hz": _parse_float,
    "n_rb": _parse_int,
    "d0_m": _parse_float,
    "dmax_m": _parse_float,
    "fc_mhz": _parse_float,
    "sinr_threshold_db": _parse_float,
    "bs_power_division": _parse_str,
    "a2_rb_demand": _parse_int,
}

_PLAN_PARSERS = {
    "n_users": _parse_int,
    "radius_m": _parse_float,
    "q": _parse_int,
    "seed": _parse_int,
    "mode": _parse_str,
    "sectored": _parse_bool,
    "demand_script": _parse_optional_path,
    "replications": _parse_int,
}


def parse_config(text: str) -> tuple[RadioConfig, SimulationPlan]:
    """Parse `key = value` lines; '#' starts a comment, unknown keys reject."""
    radio_kw = {}
    plan_kw = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _RADIO_PARSERS:
            parser, target = _RADIO_PARSERS[key], radio_kw
        elif key in _PLAN_PARSERS:
            parser, target = _PLAN_PARSERS[key], plan_kw
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            target[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return RadioConfig(**radio_kw), SimulationPlan(**plan_kw)


def load_config(path) -> tuple[RadioConfig, SimulationPlan]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RadioConfig, plan: SimulationPlan) -> str:
    """Emit every key; load(serialize(...)) reproduces both objects exactly."""
    lines = []
    for f in fields(cfg):
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    for f in fields(plan):
        v = getattr(plan, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {_format_value(v)}")
    return "\n".join(lines) + "\n"
