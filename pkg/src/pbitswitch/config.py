from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import linalg
from .channels import DEFAULT_DIM_CAP, TP_TOL


@dataclass(frozen=True)
class Tolerances:
    entropy_cutoff: float = linalg.ENTROPY_CUTOFF
    psd_tol: float = linalg.PSD_TOL
    identity_tol: float = TP_TOL


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    dim_cap: int = DEFAULT_DIM_CAP
    tolerances: Tolerances = field(default_factory=Tolerances)
    out: Optional[str] = None
    report: Optional[str] = None

    def __post_init__(self):
        if self.dim_cap < 16:
            raise ValueError(f"dim_cap must be >= 16, got {self.dim_cap}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
