"""Sampler configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

STRATEGIES = ("baseline_ir", "rejection", "metropolis", "hybrid")


@dataclass(frozen=True)
class SamplerConfig:
    """Strategy selector and every tunable of the VPL samplers.

    ``None`` for ``distance_threshold``, ``clamp_distance`` and
    ``rejection_pilot`` means "derive from the scene / budget" (0.5 x scene
    diagonal, 0.01 x scene diagonal and 4 x budget respectively).
    """

    strategy: str = "hybrid"
    vpl_budget: int = 1000
    close_fraction: float = 0.8
    distance_threshold: float | None = None
    bounce_limit: int = 1
    clamp_distance: float | None = None
    seed: int = 0
    rejection_pilot: int | None = None
    metropolis_mutation_sigma: float = 0.1
    metropolis_burn_in: int = 1000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {', '.join(STRATEGIES)}")
        if self.vpl_budget < 1:
            raise ValueError("vpl_budget must be >= 1")
        if not (0.0 <= self.close_fraction <= 1.0):
            raise ValueError("close_fraction must lie in [0, 1]")
        if self.bounce_limit < 1:
            raise ValueError("bounce_limit must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in ("distance_threshold", "clamp_distance"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0")
        if self.rejection_pilot is not None and self.rejection_pilot < self.vpl_budget:
            raise ValueError("rejection_pilot must be >= vpl_budget")
        if not (math.isfinite(self.metropolis_mutation_sigma) and self.metropolis_mutation_sigma > 0):
            raise ValueError("metropolis_mutation_sigma must be finite and > 0")
        if self.metropolis_burn_in < 0:
            raise ValueError("metropolis_burn_in must be >= 0")

    def threshold_for(self, scene) -> float:
        return self.distance_threshold if self.distance_threshold is not None else 0.5 * scene.diagonal

    def clamp_for(self, scene) -> float:
        return self.clamp_distance if self.clamp_distance is not None else 0.01 * scene.diagonal

    @property
    def pilot(self) -> int:
        return self.rejection_pilot if self.rejection_pilot is not None else 4 * self.vpl_budget

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
