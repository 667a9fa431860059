"""Threshold detectors, the psi- click rule and TDC window classification."""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .source import REP_RATE_HZ

GATES = (0, 1, 2)
NO_WINDOW = 99


class Detector(str, enum.Enum):
    BSA_E = "BSA_E"
    BSA_F = "BSA_F"
    ALICE = "ALICE"
    BOB = "BOB"


DETECTOR_ORDER = (Detector.BSA_E, Detector.BSA_F, Detector.ALICE, Detector.BOB)
# photon mode -> detector
MODE_DETECTOR = {"E": Detector.BSA_E, "F": Detector.BSA_F, "A": Detector.ALICE, "D": Detector.BOB}


@dataclass(frozen=True)
class DetectorParams:
    name: str = "InGaAs"
    efficiency: float = 0.30
    dark_prob_per_gate: float = 1e-4 * 1.2
    gated: bool = True

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob_per_gate < 1.0:
            raise ValueError(f"dark_prob_per_gate must lie in [0, 1), got {self.dark_prob_per_gate}")


def ge_apd() -> DetectorParams:
    """Cooled Ge APD on one BSA output: 10 %, 40 kHz darks at one gate per pulse."""
    return DetectorParams("Ge", 0.10, 40e3 / REP_RATE_HZ)


def ingaas_apd() -> DetectorParams:
    """InGaAs APD: 30 %, 1e-4 darks per ns over a 1.2 ns gate."""
    return DetectorParams("InGaAs", 0.30, 1e-4 * 1.2)


def lab_detectors() -> dict[Detector, DetectorParams]:
    return {
        Detector.BSA_E: ge_apd(),
        Detector.BSA_F: ingaas_apd(),
        Detector.ALICE: ingaas_apd(),
        Detector.BOB: ingaas_apd(),
    }


def ideal_detectors() -> dict[Detector, DetectorParams]:
    return {d: DetectorParams("ideal", 1.0, 0.0) for d in DETECTOR_ORDER}


@dataclass(frozen=True, order=True)
class ClickRecord:
    detector: Detector
    time_bin: int
    pulse_index: int = 0
    is_dark: bool = False

    def __post_init__(self):
        if self.time_bin not in GATES:
            raise ValueError(f"time_bin must be one of {GATES}, got {self.time_bin}")


def detect(
    arrivals: Iterable[tuple[Detector, int]],
    params: Mapping[Detector, DetectorParams],
    rng: np.random.Generator,
    pulse_index: int = 0,
    survival: Mapping[Detector, float] | None = None,
) -> list[ClickRecord]:
    """Clicks for one pulse.

    Each arriving photon fires with the detector efficiency (times the optional
    channel ``survival``); every gate of every detector may also fire dark.
    Several photons in one gate still give a single click.
    """
    counts: dict[tuple[Detector, int], int] = {}
    for det, b in arrivals:
        counts[(Detector(det), b)] = counts.get((Detector(det), b), 0) + 1
    clicks = []
    for det in DETECTOR_ORDER:
        if det not in params:
            continue
        p = params[det]
        eta = p.efficiency * (survival or {}).get(det, 1.0)
        for b in GATES:
            k = counts.get((det, b), 0)
            photon = k > 0 and bool((rng.random(k) < eta).any())
            dark = rng.random() < p.dark_prob_per_gate
            if photon or dark:
                clicks.append(ClickRecord(det, b, pulse_index, is_dark=not photon))
    return clicks


def bsa_classify(clicks: Iterable[ClickRecord]) -> bool:
    """True iff E and F fired exactly once each, one in bin 0 and one in bin 1."""
    clicks = clicks if isinstance(clicks, Sequence) else list(clicks)
    e = [c.time_bin for c in clicks if c.detector is Detector.BSA_E]
    f = [c.time_bin for c in clicks if c.detector is Detector.BSA_F]
    return len(e) == 1 and len(f) == 1 and {e[0], f[0]} == {0, 1}


def window_of(click_a: ClickRecord, click_d: ClickRecord) -> int:
    """Arrival-time difference t_A - t_D in units of the bin spacing."""
    return click_a.time_bin - click_d.time_bin


@dataclass(frozen=True)
class CoincidenceEvent:
    pulse_index: int
    clicks: tuple[ClickRecord, ...]
    delta_tau_AD: int | None
    bsa_success: bool
    multi_fringe_click: bool = False

    @property
    def unconditioned(self) -> bool:
        return self.delta_tau_AD == 0

    @property
    def conditioned(self) -> bool:
        return self.bsa_success and self.delta_tau_AD == 0


def coincidence_assemble(clicks: Iterable[ClickRecord], pulse_index: int | None = None) -> CoincidenceEvent:
    clicks = tuple(sorted(clicks))
    if pulse_index is None:
        pulse_index = clicks[0].pulse_index if clicks else 0
    a = [c for c in clicks if c.detector is Detector.ALICE]
    d = [c for c in clicks if c.detector is Detector.BOB]
    dt = window_of(a[0], d[0]) if len(a) == 1 and len(d) == 1 else None
    return CoincidenceEvent(
        pulse_index,
        clicks,
        dt,
        bsa_classify(clicks),
        multi_fringe_click=len(a) > 1 or len(d) > 1,
    )


def format_event(ev: CoincidenceEvent) -> str:
    """One line of the per-event log: pulse, clicks, bsa_success, delta_tau."""
    clicks = ",".join(f"{c.detector.value}@{c.time_bin}{'*' if c.is_dark else ''}" for c in ev.clicks)
    dt = "-" if ev.delta_tau_AD is None else str(ev.delta_tau_AD)
    return f"{ev.pulse_index}\t{clicks or '-'}\t{int(ev.bsa_success)}\t{dt}"


# -- vectorized path -------------------------------------------------------


def click_probabilities(counts: np.ndarray, eff: np.ndarray, dark: np.ndarray) -> np.ndarray:
    """P(click) per gate given photon counts of shape (..., 4, 3)."""
    miss = (1.0 - eff)[:, None] ** counts
    return 1.0 - (1.0 - dark)[:, None] * miss


def sample_clicks(counts: np.ndarray, eff: np.ndarray, dark: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return rng.random(counts.shape) < click_probabilities(counts, eff, dark)


def classify_clicks(clicks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Herald flags and A-D windows for a (M, 4, 3) boolean click array.

    Windows are NO_WINDOW unless ALICE and BOB each fired exactly once.
    """
    e, f, a, d = (clicks[:, i, :] for i in range(4))
    bins = np.arange(3)
    single = lambda x: x.sum(axis=1) == 1  # noqa: E731
    e_bin = (e * bins).sum(axis=1)
    f_bin = (f * bins).sum(axis=1)
    herald = single(e) & single(f) & (e_bin + f_bin == 1)
    ok = single(a) & single(d)
    window = np.where(ok, (a * bins).sum(axis=1) - (d * bins).sum(axis=1), NO_WINDOW)
    return herald, window
