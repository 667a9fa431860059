"""Brute-force reference for the noisy swapping fringe.

Nothing is sampled. Every pair-number pattern up to two pairs per crystal is
enumerated with its exact weight, along with every bin choice and every
optical route, and detector outcomes are summed exactly. The coherent
one-pair-per-crystal term is an explicit sum over labeled photon paths. It
does not go through the state-vector engine, so it can check that engine's
results.
"""

from __future__ import annotations

import cmath
import itertools
import math
import warnings
from collections import defaultdict
from typing import NamedTuple

import numpy as np

from .config import ExperimentConfig

# detector rows: E, F, ALICE, BOB; gates 0..2
_ROW = {"E": 0, "F": 1, "A": 2, "D": 3}
_BS = {("B", "E"): 1 / math.sqrt(2), ("B", "F"): 1j / math.sqrt(2), ("C", "E"): 1j / math.sqrt(2), ("C", "F"): 1 / math.sqrt(2)}
TRUNCATION_LIMIT = 1e-3


class TruncationWarning(UserWarning):
    pass


class OracleResult(NamedTuple):
    V: float
    phase_offset: float
    rate: float
    conditioned: np.ndarray
    unconditioned: np.ndarray
    windows: np.ndarray
    truncated_mass: float


def _pair_weights(config: ExperimentConfig, n_max: int) -> list[float]:
    src = config.source
    if src.statistics == "fixed":
        return [1.0 if n == 1 else 0.0 for n in range(n_max + 1)]
    mu = src.mu
    if src.statistics == "poisson":
        w = [math.exp(-mu) * mu**n / math.factorial(n) for n in range(n_max + 1)]
        law = lambda n: math.exp(-mu) * mu**n / math.factorial(n)  # noqa: E731
    else:
        w = [mu**n / (1 + mu) ** (n + 1) for n in range(n_max + 1)]
        law = lambda n: mu**n / (1 + mu) ** (n + 1)  # noqa: E731
    if src.max_pairs is not None:
        norm = math.fsum(law(n) for n in range(src.max_pairs + 1))
        w = [x / norm if n <= src.max_pairs else 0.0 for n, x in enumerate(w)]
    return w


def _coherent_patterns(config: ExperimentConfig, beta: float) -> dict[tuple, float]:
    """Gate-count patterns for one pair per crystal, by explicit path sum."""
    src = config.source
    alpha = config.alpha
    c = (src.c0, src.c1)
    late_phase = {1: src.delta, 2: src.delta + math.pi}
    xi2 = src.xi**2
    out: dict[tuple, float] = defaultdict(float)
    for disting in (False, True):
        weight = 1.0 - xi2 if disting else xi2
        if weight == 0.0:
            continue
        amps: dict[tuple, complex] = defaultdict(complex)
        for x, y in itertools.product((0, 1), repeat=2):
            a0 = c[x] * c[y] * cmath.exp(1j * (x * late_phase[1] + y * late_phase[2]))
            for mb, mc in itertools.product("EF", repeat=2):
                a1 = a0 * _BS[("B", mb)] * _BS[("C", mc)]
                if disting:
                    bsa = (("B", mb, x), ("C", mc, y))
                else:
                    bsa = tuple(sorted(((mb, x), (mc, y))))
                for pa, sa, pd, sd in itertools.product((0, 1), repeat=4):
                    amp = a1 * 0.5 * (cmath.exp(1j * alpha) * (1 - 2 * pa) if sa else 1.0)
                    amp *= 0.5 * (cmath.exp(1j * beta) * (1 - 2 * pd) if sd else 1.0)
                    amps[(bsa, (pa, x + sa), (pd, y + sd))] += amp
        for (bsa, (pa, ba), (pd, bd)), amp in amps.items():
            if not disting and bsa[0] == bsa[1]:
                amp *= math.sqrt(2)
            counts = [[0, 0, 0] for _ in range(4)]
            for photon in bsa:
                mode, b = photon[-2], photon[-1]
                counts[_ROW[mode]][b] += 1
            if pa == 0:
                counts[2][ba] += 1
            if pd == 0:
                counts[3][bd] += 1
            out[tuple(map(tuple, counts))] += weight * abs(amp) ** 2
    return out


def _classical_patterns(config: ExperimentConfig, n1: int, n2: int) -> dict[tuple, float]:
    """Gate-count patterns for independent classical pairs."""
    p_late = config.source.c1**2
    photon_routes = []  # per pair: list of (gate additions, prob)
    for fringe_row, n in ((2, n1), (3, n2)):
        for _ in range(n):
            routes = []
            for b, pb in ((0, 1 - p_late), (1, p_late)):
                for mode in (0, 1):
                    for shift, ps in ((0, 0.25), (1, 0.25), (None, 0.5)):
                        adds = [(mode, b)] + ([] if shift is None else [(fringe_row, b + shift)])
                        routes.append((adds, pb * 0.5 * ps))
            photon_routes.append(routes)
    out: dict[tuple, float] = defaultdict(float)
    for combo in itertools.product(*photon_routes):
        counts = [[0, 0, 0] for _ in range(4)]
        p = 1.0
        for adds, pr in combo:
            p *= pr
            for row, b in adds:
                counts[row][b] += 1
        if p:
            out[tuple(map(tuple, counts))] += p
    return out


def _detection_terms(counts, eff, dark) -> tuple[float, list[float], list[float]]:
    """P(herald), P(single ALICE click in gate k), P(single BOB click in gate k)."""
    singles = []
    for row in range(4):
        q = [1.0 - (1.0 - dark[row]) * (1.0 - eff[row]) ** counts[row][g] for g in range(3)]
        singles.append([q[g] * math.prod(1.0 - q[h] for h in range(3) if h != g) for g in range(3)])
    e, f = singles[0], singles[1]
    herald = e[0] * f[1] + e[1] * f[0]
    return herald, singles[2], singles[3]


def _window_tallies(patterns: dict[tuple, float], eff, dark) -> tuple[np.ndarray, np.ndarray]:
    cond = np.zeros(5)
    uncond = np.zeros(5)
    for counts, p in patterns.items():
        herald, sa, sd = _detection_terms(counts, eff, dark)
        for ga in range(3):
            for gd in range(3):
                w = p * sa[ga] * sd[gd]
                uncond[ga - gd + 2] += w
                cond[ga - gd + 2] += w * herald
    return cond, uncond


def oracle_truncated_enumeration(config: ExperimentConfig, max_pairs: int = 2, betas=None) -> OracleResult:
    """Exact per-pulse conditioned and unconditioned rates, truncated at ``max_pairs``.

    ``V`` and ``phase_offset`` follow from evaluating the conditioned rate at
    beta = alpha, alpha + pi/2, alpha + pi: the rate is a pure first harmonic in beta.
    Warns with TruncationWarning when the neglected pair mass exceeds 1e-3 of
    P(>=1 pair).
    """
    betas = config.betas if betas is None else betas
    w = _pair_weights(config, max_pairs)
    kept = math.fsum(w)
    p_any = 1.0 - w[0]
    tail = max(0.0, 1.0 - kept)
    if p_any > 0 and tail > TRUNCATION_LIMIT * p_any:
        warnings.warn(
            f"pair-number truncation at {max_pairs} drops {tail:.3g} (> {TRUNCATION_LIMIT:g} of P(>=1))",
            TruncationWarning,
            stacklevel=2,
        )
    eff = list(config.efficiencies())
    dark = list(config.dark_probs())

    background_c = np.zeros(5)
    background_u = np.zeros(5)
    for n1, n2 in itertools.product(range(max_pairs + 1), repeat=2):
        weight = w[n1] * w[n2]
        if weight == 0.0 or (n1, n2) == (1, 1):
            continue
        c, u = _window_tallies(_classical_patterns(config, n1, n2), eff, dark)
        background_c += weight * c
        background_u += weight * u
    w11 = w[1] * w[1]

    def at(beta):
        c, u = _window_tallies(_coherent_patterns(config, beta), eff, dark) if w11 else (np.zeros(5), np.zeros(5))
        return background_c + w11 * c, background_u + w11 * u

    a = config.alpha
    r0, r90, r180 = (at(a + s)[0][2] for s in (0.0, math.pi / 2, math.pi))
    mean = 0.5 * (r0 + r180)
    cos_part = 0.5 * (r0 - r180)
    # R(beta) = mean + cos_part*cos(alpha - beta) + sin_part*sin(alpha - beta)
    sin_part = mean - r90
    V = math.hypot(cos_part, sin_part) / mean if mean > 0 else 0.0
    phase = math.atan2(-sin_part, cos_part)

    rows = [at(b) for b in betas]
    windows = np.array([c for c, _ in rows])
    return OracleResult(
        V=V,
        phase_offset=phase,
        rate=mean,
        conditioned=windows[:, 2].copy(),
        unconditioned=np.array([u[2] for _, u in rows]),
        windows=windows,
        truncated_mass=tail,
    )
