"""Experiment configuration.

A config file is a JSON object whose keys are the field names of
:class:`ExperimentConfig` (hyphens and underscores are interchangeable)::

    {
      "N": 6,
      "g12": 1.0, "g23": 1.0,
      "charger": "all",
      "t_end": 20, "samples": 2001,
      "n_max": "auto",
      "resolution": 41,
      "out": "results/fig4",
      "workers": 4
    }

Command-line flags override values read from the file.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from ..dynamics import TimeGrid
from ..errors import InvalidParameterError
from ..model import CHARGER_KINDS, ModelParams
from ..phasespace import PhaseGrid

MODES = ("evolve", "sweep-coupling", "sweep-n", "ground", "wigner", "photons")
METHODS = ("auto", "spectral", "krylov")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "evolve"
    # model
    N: int = 6
    omega_c: float = 1.0
    omega1: float = 0.0
    omega2: float = 1.0
    omega3: float = 1.95
    g12: float = 1.0
    g23: float = 1.0
    n_max: Optional[int] = None
    charger: str = "all"
    # time grid and integrator
    t_end: float = 20.0
    samples: int = 2001
    method: str = "auto"
    krylov_dim: int = 30
    refine_peaks: bool = False
    # coupling sweep
    g12_range: tuple = (0.0, 2.0)
    g23_range: tuple = (0.0, 2.0)
    resolution: int = 41
    # N sweep
    N_range: tuple = (1, 10)
    # ground-state scans: one g12 line per g23 value, plus the diagonal
    ground_g23_values: tuple = (0.0, 0.2, 0.5, 0.8, 1.0)
    ground_diagonal: bool = True
    ground_resolution: int = 41
    # phase space
    coupling_points: tuple = ((0.2, 0.2), (0.5, 0.5), (0.8, 0.8))
    wigner_extent: float = 7.0
    wigner_resolution: int = 201
    # execution
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.method not in METHODS:
            raise InvalidParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.charger != "all" and self.charger not in CHARGER_KINDS:
            raise InvalidParameterError(f"charger must be 'all' or one of {CHARGER_KINDS}")
        for name in ("g12_range", "g23_range", "N_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise InvalidParameterError(f"{name} is empty: {lo} > {hi}")
        if self.N_range[0] < 1:
            raise InvalidParameterError("N_range must start at N >= 1")
        if self.resolution < 1 or self.ground_resolution < 1:
            raise InvalidParameterError("resolutions must be positive")
        if not self.coupling_points:
            raise InvalidParameterError("coupling_points must not be empty")
        if self.workers < 1:
            raise InvalidParameterError("workers must be >= 1")
        # validates the physical parameters and the grids
        self.model_params()
        self.time_grid()
        self.phase_grid()

    @property
    def charger_kinds(self) -> tuple[str, ...]:
        return CHARGER_KINDS if self.charger == "all" else (self.charger,)

    def model_params(self, **changes) -> ModelParams:
        base = dict(
            N=self.N, omega_c=self.omega_c, omega1=self.omega1, omega2=self.omega2,
            omega3=self.omega3, g12=self.g12, g23=self.g23, n_max=self.n_max,
            charger_kind=self.charger_kinds[0],
        )
        base.update(changes)
        return ModelParams(**base)

    def time_grid(self) -> TimeGrid:
        return TimeGrid(self.t_end, self.samples)

    def phase_grid(self) -> PhaseGrid:
        e = self.wigner_extent
        return PhaseGrid(-e, e, -e, e, self.wigner_resolution, self.wigner_resolution)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = json.loads(json.dumps(v))
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, excluding the output location."""
        d = self.to_dict()
        d.pop("out")
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _normalize_key(key: str) -> str:
    k = key.replace("-", "_")
    if k == "nmax":
        k = "n_max"
    if k not in _FIELDS:
        raise InvalidParameterError(f"unknown configuration key {key!r}")
    return k


def _coerce(name: str, value):
    if name == "n_max" and (value is None or value == "auto"):
        return None
    if name in ("g12_range", "g23_range", "N_range"):
        return tuple(value)
    if name == "ground_g23_values":
        return tuple(float(v) for v in value)
    if name == "coupling_points":
        return tuple(tuple(float(c) for c in p) for p in value)
    return value


def normalize(values: dict) -> dict:
    out = {}
    for key, value in values.items():
        name = _normalize_key(key)
        out[name] = _coerce(name, value)
    return out


def load_config(path: Optional[str | Path] = None, **overrides) -> ExperimentConfig:
    """Read a JSON config file (optional) and apply ``overrides`` on top."""
    values: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise InvalidParameterError("configuration file must contain a JSON object")
        values.update(normalize(data))
    values.update(normalize({k: v for k, v in overrides.items() if v is not None}))
    return ExperimentConfig(**values)
