"""Run configuration: a YAML file, with command-line overrides applied on top."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError

TOGGLES = ("concurrent", "trajectory", "suppression", "mediation", "joint", "tertiles")
INPUTS = ("transcripts", "pcl", "demographics", "bundle")


@dataclass
class RunConfig:
    transcripts: Path | None = None
    pcl: Path | None = None
    demographics: Path | None = None
    bundle: Path | None = None
    out: Path = Path("out")
    alpha: float = 0.05
    seed: int = 1
    jobs: int = 1
    analyses: dict[str, bool] = field(default_factory=lambda: {t: True for t in TOGGLES})
    simulate: dict = field(default_factory=dict)

    def validate(self, require_inputs: bool = True) -> "RunConfig":
        if not isinstance(self.alpha, (int, float)) or not 0.0 < float(self.alpha) < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if int(self.jobs) < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs!r}")
        unknown = set(self.analyses) - set(TOGGLES)
        if unknown:
            raise ConfigError(f"unknown analyses: {', '.join(sorted(unknown))}")
        if require_inputs:
            for name in INPUTS:
                p = getattr(self, name)
                if p is None:
                    raise ConfigError(f"missing input path: {name}")
                if not Path(p).exists():
                    raise ConfigError(f"{name} path does not exist: {p}")
        return self

    def enabled(self, name: str) -> bool:
        return bool(self.analyses.get(name, True))

    def as_dict(self) -> dict:
        d = asdict(self)
        for k in (*INPUTS, "out"):
            d[k] = None if d[k] is None else str(d[k])
        d["analyses"] = {t: self.enabled(t) for t in TOGGLES}
        return d


def load_config(path=None, **overrides) -> RunConfig:
    """Read a YAML run config; relative paths resolve against the file's directory.

    Keyword overrides that are not None replace file values.
    """
    data: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        base = path.parent
    known = {f.name for f in fields(RunConfig)}
    inputs = data.pop("inputs", {}) or {}
    data = {**inputs, **data}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    for k in (*INPUTS, "out"):
        if data.get(k) is not None:
            p = Path(data[k])
            data[k] = p if p.is_absolute() else base / p
    analyses = {t: True for t in TOGGLES}
    analyses.update(data.pop("analyses", None) or {})
    cfg = RunConfig(**data, analyses=analyses)
    for k, v in overrides.items():
        if v is None:
            continue
        if k not in known:
            raise ConfigError(f"unknown override: {k}")
        setattr(cfg, k, Path(v) if k in (*INPUTS, "out") else v)
    return cfg
