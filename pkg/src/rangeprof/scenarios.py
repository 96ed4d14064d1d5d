"""Canned experiment scenarios: the jamming and white-noise reference setups."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .driver import DesignProblem, InitSpec, LFMStart, MinEigStart
from .minorize import Metric
from .model import (
    DisturbanceModel,
    JammingSpec,
    SpectralBand,
    SpectralBandSet,
    TargetPrior,
    jamming_covariance,
    spectral_interference_matrix,
)
from .qpsolve import ConstraintSpec, Energy, Papr, Spectral


@dataclass(frozen=True)
class Scenario:
    """Parameter set for one experiment; ``e_t`` defaults to ``L``."""

    L: int = 100
    P: int = 10
    mean: complex = 5.0
    cov_scale: float = 1.0
    jamming: JammingSpec | None = field(default_factory=JammingSpec)
    noise_power: float = 1.0
    e_t: float | None = None
    bands: SpectralBandSet = field(default_factory=lambda: SpectralBandSet((SpectralBand(0.7, 0.8),)))
    E_I: float = 0.05

    @property
    def L0(self) -> int:
        return self.L + self.P - 1

    @property
    def energy(self) -> float:
        return float(self.L if self.e_t is None else self.e_t)

    def prior(self) -> TargetPrior:
        return TargetPrior.scaled_identity(self.P, self.cov_scale, self.mean)

    def disturbance(self) -> DisturbanceModel:
        if self.jamming is None:
            return DisturbanceModel.white(self.L0, self.noise_power)
        return jamming_covariance(self.jamming, self.L0)

    def interference_matrix(self) -> np.ndarray:
        return spectral_interference_matrix(self.bands, self.L)

    def constraint(self, kind: str, rho: float = 1.0) -> ConstraintSpec:
        if kind == "energy":
            return Energy(self.energy)
        if kind == "papr":
            return Papr(self.energy, rho)
        if kind == "spectral":
            return Spectral(self.energy, self.interference_matrix(), self.E_I)
        raise ValueError(f"unknown constraint kind {kind!r}")

    def problem(self, metric: Metric, kind: str, rho: float = 1.0, initial: InitSpec | None = None) -> DesignProblem:
        if initial is None:
            initial = MinEigStart() if kind == "spectral" else LFMStart()
        return DesignProblem(metric, self.constraint(kind, rho), self.prior(), self.disturbance(), initial)


def jamming_scenario(L: int = 100, P: int = 10) -> Scenario:
    """Barrage jammer on [0.1, 0.3], jam power 1000, unit noise, mean 5, R_h = I."""
    return Scenario(L=L, P=P)


def zcz_scenario(L: int = 100, P: int = 10) -> Scenario:
    """White unit noise, R_h = 0.1 I: the setting in which optimal codes are ZCZ."""
    return Scenario(L=L, P=P, cov_scale=0.1, jamming=None, noise_power=1.0)
