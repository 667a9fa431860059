"""Analyzer interferometers, the Bell-state-analyzer beamsplitter, fiber loss."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qstate import TWO_PI, StateError, StateVector, _label

INV_SQRT2 = 1 / math.sqrt(2)
# beamsplitter amplitudes, input -> {output: amplitude}
BS_AMPLITUDES = {
    "B": {"E": INV_SQRT2, "F": 1j * INV_SQRT2},
    "C": {"E": 1j * INV_SQRT2, "F": INV_SQRT2},
}
# classical routing through one analyzer: (bin shift or None if the photon
# leaves by the unmonitored port, probability)
ANALYZER_ROUTES = ((0, 0.25), (1, 0.25), (None, 0.5))


@dataclass(frozen=True)
class AnalyzerSettings:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", self.alpha % TWO_PI)
        object.__setattr__(self, "beta", self.beta % TWO_PI)


@dataclass(frozen=True)
class ChannelParams:
    length_km: float = 1.1
    transmission: float = 0.95**1.1
    latency_s: float = 5e-6

    def __post_init__(self):
        if not 0.0 < self.transmission <= 1.0:
            raise ValueError(f"transmission must lie in (0, 1], got {self.transmission}")
        if self.length_km < 0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")

    @classmethod
    def from_loss(cls, length_km: float, per_km: float = 0.95, latency_s: float = 5e-6) -> ChannelParams:
        return cls(length_km, per_km**length_km, latency_s)


def analyzer_evolve(s: StateVector, photon, phase: float, port: int = 0) -> StateVector:
    """Send one photon through an unbalanced Michelson analyzer.

    Each bin i goes to (|i> + e^{i phase}|i+1>)/2 in the monitored port
    (``port=0``) and to (|i> - e^{i phase}|i+1>)/2 in the other one, so a
    single port is sub-normalized.
    """
    photon = _label(photon)
    if photon not in s.labels:
        raise StateError(f"photon {photon} not in state {s.labels}")
    late = (1.0 if port == 0 else -1.0) * cmath.exp(1j * phase) / 2

    def step(ket):
        i = ket[photon]
        return [(ket, 0.5), ({**ket, photon: i + 1}, late)]

    return s.map_kets(step)


def _modes_key(photons, distinguishable):
    """Occupancy tuples for E and F from a list of (origin, mode, bin)."""
    if distinguishable:
        e = tuple(sorted((b, o) for o, m, b in photons if m == "E"))
        f = tuple(sorted((b, o) for o, m, b in photons if m == "F"))
    else:
        e = tuple(sorted(b for _, m, b in photons if m == "E"))
        f = tuple(sorted(b for _, m, b in photons if m == "F"))
    return e, f


def bsa_beamsplitter(s: StateVector, distinguishable: bool = False) -> StateVector:
    """Mix photons B and C on the 50/50 coupler.

    The output replaces labels B, C by the output modes E and F. Their value is
    the sorted tuple of occupied bins (a bin appears twice when two photons
    share it). With ``distinguishable=True`` each entry is (bin, origin), so
    paths that swap the two photons no longer interfere.
    """
    inputs = [l for l in ("B", "C") if l in s.labels]
    if not inputs:
        raise StateError(f"no beamsplitter input among {s.labels}")
    rest = [l for l in s.labels if l not in inputs]

    def step(ket):
        out = {}
        routes = [[]]
        for origin in inputs:
            routes = [r + [(origin, m, ket[origin], a)] for r in routes for m, a in BS_AMPLITUDES[origin].items()]
        for r in routes:
            amp = 1.0 + 0j
            for *_, a in r:
                amp *= a
            photons = [p[:3] for p in r]
            e, f = _modes_key(photons, distinguishable)
            if not distinguishable:
                # bosonic normalization of doubly occupied modes
                for occ in (e, f):
                    for b in set(occ):
                        amp *= math.sqrt(math.factorial(occ.count(b)))
            key = {l: ket[l] for l in rest} | {"E": e, "F": f}
            k = tuple(sorted(key.items()))
            out[k] = out.get(k, 0) + amp
        return [(dict(k), a) for k, a in out.items()]

    return s.map_kets(step)


def strip_origin(occ: tuple) -> tuple:
    """Observable bins of an E/F occupancy value, either representation."""
    return tuple(sorted(x[0] if isinstance(x, tuple) else x for x in occ))


def pattern_distribution(s: StateVector, alpha: float, beta: float, xi: float = 1.0) -> dict[tuple, float]:
    """Exact distribution of photon arrivals for a coherent A, B, C, D state.

    Keys are (E bins, F bins, A bin or None, D bin or None); None marks a photon
    that left its analyzer through the unmonitored port. With probability xi**2
    the B and C photons interfere, otherwise they are distinguishable.
    """
    dist: dict[tuple, float] = {}
    weights = ((False, xi**2), (True, 1.0 - xi**2))
    for pa in (0, 1):
        after_a = analyzer_evolve(s, "A", alpha, pa)
        for pd in (0, 1):
            after = analyzer_evolve(after_a, "D", beta, pd)
            for disting, w in weights:
                if w == 0.0:
                    continue
                for ket, amp in bsa_beamsplitter(after, disting).items():
                    key = (
                        strip_origin(ket["E"]),
                        strip_origin(ket["F"]),
                        ket["A"] if pa == 0 else None,
                        ket["D"] if pd == 0 else None,
                    )
                    dist[key] = dist.get(key, 0.0) + w * abs(amp) ** 2
    return dist


def apply_transmission(photons, channel: ChannelParams, rng: np.random.Generator):
    """Independent survival of each photon.

    ``photons`` is either a sequence of photon descriptors (returns the
    survivors) or an integer count array (returns binomially thinned counts).
    """
    if isinstance(photons, np.ndarray):
        if channel.transmission == 1.0:
            return photons.copy()
        return rng.binomial(photons, channel.transmission)
    photons = list(photons)
    if channel.transmission == 1.0:
        return photons
    keep = rng.random(len(photons)) < channel.transmission
    return [p for p, k in zip(photons, keep) if k]


def rate_factor(*channels: ChannelParams) -> float:
    """Multiplier on analytic coincidence rates; visibilities are unchanged."""
    return math.prod(c.transmission for c in channels)
