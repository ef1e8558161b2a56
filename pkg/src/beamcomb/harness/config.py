"""Experiment configuration: ``key = value`` files plus CLI overrides."""
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..channel import ChannelConfig
from ..errors import ConfigError

SCHEMES = ("none", "sgbc", "bbbc", "optimal", "exhaustive")
DISCRETE_SCHEMES = ("sgbc", "bbbc", "exhaustive")


@dataclass(frozen=True)
class ExperimentConfig:
    antennas: int = 64
    users: int = 2
    rays: int = 6
    spread_deg: float = 45.0
    sector_deg: float = 120.0
    beams: int = 16
    rf_chains: tuple = tuple(range(2, 13))
    bits: tuple = (1, 2)
    snr_db: tuple = (0.0,)
    samples: int = 2048
    trials: int = 50
    seed: int = 0
    scheme: tuple = ("none", "sgbc", "bbbc", "optimal")
    epsilon: float = 0.0
    node_budget: int = 1_000_000
    approx_bound: bool = False
    grid: str = "centered"
    # wall-clock timing breaks byte-identical reruns, so it is opt-in
    timing: bool = False
    jobs: int = 1

    def validate(self):
        if not self.scheme:
            raise ConfigError("scheme list is empty")
        bad = [s for s in self.scheme if s not in SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s) {bad}; choose from {SCHEMES}")
        if not self.rf_chains or not self.bits or not self.snr_db:
            raise ConfigError("rf_chains, bits and snr_db need at least one value")
        if not all(1 <= k <= self.beams for k in self.rf_chains):
            raise ConfigError(f"every rf_chains value must lie in [1, beams={self.beams}]")
        if not 1 <= self.beams <= self.antennas:
            raise ConfigError(f"beams must lie in [1, antennas={self.antennas}]")
        if any(b < 1 for b in self.bits):
            raise ConfigError("bits must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be non-negative")
        if self.node_budget < 1:
            raise ConfigError("node_budget must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        self.channel().validate()
        return self

    def channel(self):
        return ChannelConfig(antennas=self.antennas, users=self.users, rays=self.rays,
                             spread_deg=self.spread_deg, sector_deg=self.sector_deg)

    def to_text(self):
        lines = []
        for k, v in asdict(self).items():
            if isinstance(v, (tuple, list)):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


FULL_SCALE = dict(antennas=128, beams=32, rf_chains=(8,), bits=(1, 2, 3), samples=16800)

LIST_KEYS = {"rf_chains": int, "bits": int, "snr_db": float, "scheme": str}
SWEEP_KEYS = ("antennas", "beams", "users")


def _field_types():
    types = {}
    for f in fields(ExperimentConfig):
        if f.name in LIST_KEYS:
            types[f.name] = LIST_KEYS[f.name]
        else:
            types[f.name] = type(f.default)
    return types


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_value(key, text):
    types = _field_types()
    if key not in types:
        raise ConfigError(f"unknown configuration key {key!r}")
    conv = types[key]
    try:
        if key in LIST_KEYS:
            items = [t.strip() for t in str(text).split(",") if t.strip()]
            return tuple(conv(t) for t in items)
        if conv is bool:
            return _parse_bool(str(text))
        if conv is int:
            return int(float(text)) if "e" in str(text).lower() else int(text)
        return conv(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def read_config_file(path):
    """Raw ``key -> text`` mapping; blank lines and ``#`` comments are skipped."""
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return raw


def build_config(raw, base=None):
    base = base or ExperimentConfig()
    values = {k: parse_value(k, v) for k, v in raw.items()}
    return replace(base, **values).validate()


def expand_sweep(raw):
    """Split comma lists in the grid keys into one raw mapping per grid point."""
    axes = []
    for key in SWEEP_KEYS:
        if key in raw:
            axes.append((key, [v.strip() for v in str(raw[key]).split(",") if v.strip()]))
    points = [dict(raw)]
    for key, vals in axes:
        points = [dict(p, **{key: v}) for p in points for v in vals]
    return points
