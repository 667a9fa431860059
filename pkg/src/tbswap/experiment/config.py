"""Run configuration shared by the analytic, Monte Carlo and oracle paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..detection import DETECTOR_ORDER, Detector, DetectorParams, lab_detectors
from ..optics import AnalyzerSettings, ChannelParams
from ..qstate import TAU_NS
from ..source import REP_RATE_HZ, SourceParams

MODES = ("analytic", "monte_carlo")
SAMPLING = ("direct", "stratified")


def beta_grid(n: int) -> tuple[float, ...]:
    return tuple(2.0 * math.pi * k / n for k in range(n))


@dataclass(frozen=True)
class Channels:
    alice: ChannelParams = field(default_factory=ChannelParams)
    bob: ChannelParams = field(default_factory=ChannelParams)
    # common loss of both BSA outputs
    bsa: ChannelParams = field(default_factory=lambda: ChannelParams(0.0, 1.0, 0.0))

    def for_detector(self, det: Detector) -> ChannelParams:
        if det is Detector.ALICE:
            return self.alice
        if det is Detector.BOB:
            return self.bob
        return self.bsa


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceParams = field(default_factory=SourceParams)
    alpha: float = 0.0
    betas: tuple[float, ...] = beta_grid(12)
    channels: Channels = field(default_factory=Channels)
    detectors: dict = field(default_factory=lab_detectors)
    n_pulses: int = 200_000
    master_seed: int = 0
    mode: str = "analytic"
    sampling: str = "stratified"
    block_size: int = 1 << 16
    event_log: int = 0
    tau_ns: float = TAU_NS
    rep_rate_hz: float = REP_RATE_HZ

    def __post_init__(self):
        if not self.betas:
            raise ValueError("analyzers.betas must not be empty")
        if self.mode not in MODES:
            raise ValueError(f"run.mode must be one of {MODES}, got {self.mode!r}")
        if self.sampling not in SAMPLING:
            raise ValueError(f"run.sampling must be one of {SAMPLING}, got {self.sampling!r}")
        if self.mode == "monte_carlo" and self.n_pulses <= 0:
            raise ValueError(f"run.n_pulses must be > 0, got {self.n_pulses}")
        if self.block_size <= 0:
            raise ValueError(f"run.block_size must be > 0, got {self.block_size}")
        missing = set(DETECTOR_ORDER) - set(self.detectors)
        if missing:
            raise ValueError(f"detectors missing: {sorted(d.value for d in missing)}")
        for d, p in self.detectors.items():
            if not isinstance(p, DetectorParams):
                raise ValueError(f"detectors.{Detector(d).value} is not a DetectorParams")

    @property
    def settings(self) -> list[AnalyzerSettings]:
        return [AnalyzerSettings(self.alpha, b) for b in self.betas]

    def efficiencies(self) -> np.ndarray:
        """Per-photon detection probability (detector x channel), detector order."""
        return np.array(
            [self.detectors[d].efficiency * self.channels.for_detector(d).transmission for d in DETECTOR_ORDER]
        )

    def dark_probs(self) -> np.ndarray:
        return np.array([self.detectors[d].dark_prob_per_gate for d in DETECTOR_ORDER])
