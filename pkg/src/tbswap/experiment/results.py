from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..qstate import BELL_BOUND, Entanglement, classify_entanglement, fidelity_from_visibility
from .config import ExperimentConfig
from .fitting import FitResult, fit_visibility

WINDOWS = (-2, -1, 0, 1, 2)


@dataclass
class ScanResult:
    """Phase scan with and without BSM conditioning.

    Counts are floats: plain event counts for direct sampling and analytic
    runs, weighted estimates for ``pulses`` physical pulses under stratified
    sampling (then the ``*_var`` arrays carry the estimator variance).
    ``windows`` holds conditioned counts in the five A-D windows, -2..+2.
    """

    config: ExperimentConfig
    betas: np.ndarray
    conditioned: np.ndarray
    unconditioned: np.ndarray
    pulses: np.ndarray
    windows: np.ndarray
    unconditioned_windows: np.ndarray
    conditioned_var: np.ndarray | None = None
    unconditioned_var: np.ndarray | None = None
    fit_conditioned: FitResult | None = None
    fit_unconditioned: FitResult | None = None
    metadata: dict = field(default_factory=dict)

    def fit(self) -> ScanResult:
        a = self.config.alpha
        self.fit_conditioned = fit_visibility(self.betas, self.conditioned, a, self.conditioned_var)
        self.fit_unconditioned = fit_visibility(self.betas, self.unconditioned, a, self.unconditioned_var)
        return self


class Summary(NamedTuple):
    V: float
    sigma_V: float
    V_reported: float
    F2: float
    classification: Entanglement
    sigma_above_bell: float | None
    V_unconditioned: float | None = None
    sigma_V_unconditioned: float | None = None


def summarize_visibility(V: float, sigma_V: float) -> Summary:
    """F2, entanglement class and distance above the 1/sqrt2 bound in sigmas."""
    reported = min(max(V, 0.0), 1.0)
    above = (V - BELL_BOUND) / sigma_V if sigma_V > 0 else None
    return Summary(V, sigma_V, reported, fidelity_from_visibility(reported), classify_entanglement(reported), above)


def summarize(scan: ScanResult) -> Summary:
    if scan.fit_conditioned is None:
        scan.fit()
    fc, fu = scan.fit_conditioned, scan.fit_unconditioned
    s = summarize_visibility(fc.V, fc.sigma_V)
    return s._replace(V_unconditioned=fu.V, sigma_V_unconditioned=fu.sigma_V)


def sigma_distance(a: float, b: float, sigma: float) -> float:
    return abs(a - b) / sigma if sigma > 0 else math.inf
