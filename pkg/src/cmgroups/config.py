"""Run configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .asymptotics import DEFAULT_K
from .curves import CurveSpec
from .presets import DEFAULT_PRESET, get_preset
from .primes import DEFAULT_SEGMENT


def default_checkpoints(xmax: int) -> tuple[int, ...]:
    """Powers of ten from 10^3 up to xmax, plus xmax itself."""
    pts = []
    x = 1000
    while x <= xmax:
        pts.append(x)
        x *= 10
    if not pts or pts[-1] != xmax:
        pts.append(xmax)
    return tuple(pts)


@dataclass
class RunConfig:
    curve: CurveSpec = field(default_factory=lambda: get_preset(DEFAULT_PRESET))
    xmax: int = 100_000
    checkpoints: tuple[int, ...] = ()
    workers: int = field(default_factory=lambda: int(os.environ.get("CMGROUPS_WORKERS", "1")))
    segment: int = DEFAULT_SEGMENT
    K: int = DEFAULT_K
    cache_dir: Path = field(default_factory=lambda: Path(os.environ.get("CMGROUPS_CACHE_DIR", ".cmgroups-cache")))
    out: Path = Path("report")
    crosscheck_rate: float = 0.01
    dual_oracle_k: tuple[int, ...] = (2, 3, 4, 5)
    dual_oracle_limit: int = 10_000

    def __post_init__(self):
        self.cache_dir = Path(self.cache_dir)
        self.out = Path(self.out)
        if not self.checkpoints:
            self.checkpoints = default_checkpoints(self.xmax)
        self.checkpoints = tuple(self.checkpoints)
        if list(self.checkpoints) != sorted(set(self.checkpoints)):
            raise ValueError(f"checkpoints must be strictly ascending: {self.checkpoints}")
        if self.checkpoints[-1] > self.xmax:
            raise ValueError(f"checkpoint {self.checkpoints[-1]} exceeds xmax={self.xmax}")
        if not 0.0 <= self.crosscheck_rate <= 1.0:
            raise ValueError("crosscheck rate must lie in [0, 1]")
        if self.xmax < 3:
            raise ValueError("xmax must be at least 3")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
