"""Pump interferometer and the two down-conversion crystals.

Crystal 1 emits photons A and B, crystal 2 emits C and D. The second output
of the pump interferometer carries an extra pi, so the two sources produce
phi+(delta) and phi-(delta) respectively.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from .qstate import StateVector, pair_state, tensor

# P(>=1 pair) = 6 % per pulse, Poisson
MU_LAB = -math.log1p(-0.06)
REP_RATE_HZ = 75e6
STATISTICS = ("poisson", "thermal", "fixed")


@dataclass(frozen=True)
class SourceParams:
    """Per-source emission parameters (both crystals share them).

    ``statistics="fixed"`` forces exactly one pair per source per pulse.
    ``max_pairs`` truncates the pair-number law (renormalized), ``None`` keeps
    it untruncated.
    """

    mu: float = MU_LAB
    delta: float = 0.0
    c0: float = 1 / math.sqrt(2)
    c1: float = 1 / math.sqrt(2)
    xi: float = 1.0
    statistics: str = "poisson"
    max_pairs: int | None = None

    def __post_init__(self):
        if not self.mu >= 0.0 or not math.isfinite(self.mu):
            raise ValueError(f"source.mu must be >= 0, got {self.mu}")
        if abs(self.c0**2 + self.c1**2 - 1.0) >= 1e-12:
            raise ValueError(f"source.c0^2 + source.c1^2 must be 1, got {self.c0**2 + self.c1**2}")
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"source.xi must lie in [0, 1], got {self.xi}")
        if self.statistics not in STATISTICS:
            raise ValueError(f"source.statistics must be one of {STATISTICS}, got {self.statistics!r}")
        if self.max_pairs is not None and self.max_pairs < 1:
            raise ValueError(f"source.max_pairs must be >= 1, got {self.max_pairs}")

    @property
    def p_late(self) -> float:
        return self.c1**2


def pair_phase(source_id: int, delta: float) -> float:
    """Phase of the late-bin pair term for each crystal."""
    if source_id == 1:
        return delta
    if source_id == 2:
        return delta + math.pi
    raise ValueError(f"source id must be 1 or 2, got {source_id}")


def ideal_pair_state(source_id: int, params: SourceParams) -> StateVector:
    labels = "AB" if source_id == 1 else "CD"
    late = params.c1 * cmath.exp(1j * pair_phase(source_id, params.delta))
    return pair_state(params.c0, late, labels)


def two_pair_state(params: SourceParams) -> StateVector:
    """Coherent four-photon state, one pair from each crystal."""
    return tensor(ideal_pair_state(1, params), ideal_pair_state(2, params))


def pair_number_pmf(params: SourceParams, n_max: int) -> np.ndarray:
    """P(n) for n = 0..n_max, renormalized over 0..max_pairs when truncated."""
    n = np.arange(n_max + 1)
    if params.statistics == "fixed":
        return (n == 1).astype(float)
    if params.statistics == "poisson":
        p = stats.poisson.pmf(n, params.mu)
    else:
        p = params.mu**n / (1.0 + params.mu) ** (n + 1)
    if params.max_pairs is not None:
        kept = n <= params.max_pairs
        p = np.where(kept, p, 0.0) / pair_number_pmf(replace(params, max_pairs=None), params.max_pairs).sum()
    return p


def sample_pair_numbers(params: SourceParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Pair counts for ``size`` independent emissions of one crystal."""
    if params.statistics == "fixed":
        return np.ones(size, dtype=np.int64)
    if params.max_pairs is not None:
        p = pair_number_pmf(params, params.max_pairs)
        return rng.choice(params.max_pairs + 1, size=size, p=p / p.sum())
    if params.statistics == "poisson":
        return rng.poisson(params.mu, size=size)
    return rng.geometric(1.0 / (1.0 + params.mu), size=size) - 1


def pulse_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based stream for one (seed, key...) coordinate."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PulseSample:
    pulse_index: int
    n_pairs_1: int
    n_pairs_2: int
    bins_1: tuple[int, ...] = ()
    bins_2: tuple[int, ...] = ()
    pair_phases: tuple[tuple[float, ...], tuple[float, ...]] = ((), ())

    def __post_init__(self):
        if self.n_pairs_1 < 0 or self.n_pairs_2 < 0:
            raise ValueError("pair numbers must be non-negative")
        if len(self.bins_1) != self.n_pairs_1 or len(self.bins_2) != self.n_pairs_2:
            raise ValueError("every emitted pair needs exactly one bin")


def sample_pulse(params: SourceParams, rng: np.random.Generator, pulse_index: int = 0) -> PulseSample:
    n1, n2 = (int(sample_pair_numbers(params, rng, 1)[0]) for _ in range(2))
    bins_1 = tuple(int(b) for b in rng.random(n1) < params.p_late)
    bins_2 = tuple(int(b) for b in rng.random(n2) < params.p_late)
    phases = (
        tuple(pair_phase(1, params.delta) if b else 0.0 for b in bins_1),
        tuple(pair_phase(2, params.delta) if b else 0.0 for b in bins_2),
    )
    return PulseSample(pulse_index, n1, n2, bins_1, bins_2, phases)


@dataclass(frozen=True)
class MultiPairEvent:
    """Classical photon list for pulses without exactly one pair per crystal.

    ``occupancy`` holds ((label, bin), count) items, sorted.
    """

    n_pairs_1: int
    n_pairs_2: int
    occupancy: tuple[tuple[tuple[str, int], int], ...] = field(default=())

    def count(self, label: str, bin_: int) -> int:
        return dict(self.occupancy).get((label, bin_), 0)

    def photons(self) -> list[tuple[str, int]]:
        out = []
        for (label, b), k in self.occupancy:
            out.extend([(label, b)] * k)
        return out


def pulse_to_state(sample: PulseSample, params: SourceParams) -> StateVector | MultiPairEvent:
    """Coherent four-photon state for a (1, 1) pulse, classical photon list otherwise.

    For a (1, 1) pulse the sampled bins are not used.
    """
    if sample.n_pairs_1 == 1 and sample.n_pairs_2 == 1:
        return two_pair_state(params)
    occ: dict[tuple[str, int], int] = {}
    for labels, bins in (("AB", sample.bins_1), ("CD", sample.bins_2)):
        for b in bins:
            for label in labels:
                occ[(label, b)] = occ.get((label, b), 0) + 1
    return MultiPairEvent(sample.n_pairs_1, sample.n_pairs_2, tuple(sorted(occ.items())))
