"""Stochastic phase scans: source -> optics -> detectors, pulse by pulse.

Pulses are processed in fixed blocks. Every block draws from its own Philox
stream keyed by (seed, beta index, stratum, block index), and block tallies are
integers merged in task order. The result therefore does not depend on how
blocks are spread over workers.

Pulses with exactly one pair per crystal draw their photon arrival pattern
from the exact coherent distribution. All other pulses are propagated
classically, photon by photon.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..detection import MODE_DETECTOR, classify_clicks, coincidence_assemble, detect, sample_clicks
from ..optics import ANALYZER_ROUTES, apply_transmission, pattern_distribution
from ..qstate import StateVector
from ..source import (
    SourceParams,
    pair_number_pmf,
    pulse_rng,
    pulse_to_state,
    sample_pair_numbers,
    sample_pulse,
    two_pair_state,
)
from .config import ExperimentConfig
from .results import ScanResult

WORKERS_ENV = "TBSWAP_WORKERS"
MIN_STRATUM_FRACTION = 0.01
TAIL_CUTOFF = 1e-9
# tally layout: 5 conditioned windows, 5 unconditioned windows, heralds, multi-click
N_TALLY = 12

_E, _F, _A, _D = range(4)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@lru_cache(maxsize=256)
def coherent_table(source: SourceParams, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Gate counts (K, 4, 3) and probabilities (K,) of the one-pair-per-crystal patterns."""
    dist = pattern_distribution(two_pair_state(source), alpha, beta, source.xi)
    keys = sorted(dist, key=repr)
    counts = np.zeros((len(keys), 4, 3), dtype=np.int16)
    for i, (e, f, a, d) in enumerate(keys):
        for b in e:
            counts[i, _E, b] += 1
        for b in f:
            counts[i, _F, b] += 1
        if a is not None:
            counts[i, _A, a] += 1
        if d is not None:
            counts[i, _D, d] += 1
    probs = np.array([dist[k] for k in keys])
    return counts, probs / probs.sum()


def add_classical_pairs(counts: np.ndarray, n_pairs: np.ndarray, fringe: int, p_late: float, rng) -> None:
    """Route independent pairs of one crystal into ``counts`` in place.

    The BSA photon picks E or F at random; the fringe photon goes through
    its analyzer (same bin, next bin, or the unmonitored port).
    """
    for j in range(int(n_pairs.max(initial=0))):
        rows = np.nonzero(n_pairs > j)[0]
        m = len(rows)
        b = (rng.random(m) < p_late).astype(np.int64)
        mode = (rng.random(m) < 0.5).astype(np.int64)
        np.add.at(counts, (rows, mode, b), 1)
        u = rng.random(m)
        keep = u < 0.5
        shift = (u >= 0.25).astype(np.int64)
        np.add.at(counts, (rows[keep], fringe, (b + shift)[keep]), 1)


@dataclass(frozen=True)
class BlockTask:
    seed: int
    key: tuple[int, ...]
    size: int
    pairs: tuple[int, int] | None
    source: SourceParams
    alpha: float
    beta: float
    eff: tuple[float, ...]
    dark: tuple[float, ...]


def simulate_block(task: BlockTask) -> np.ndarray:
    rng = pulse_rng(task.seed, *task.key)
    src = task.source
    if task.pairs is None:
        n1 = sample_pair_numbers(src, rng, task.size)
        n2 = sample_pair_numbers(src, rng, task.size)
    else:
        n1 = np.full(task.size, task.pairs[0])
        n2 = np.full(task.size, task.pairs[1])
    counts = np.zeros((task.size, 4, 3), dtype=np.int16)
    coh = (n1 == 1) & (n2 == 1)
    n_coh = int(coh.sum())
    if n_coh:
        table, probs = coherent_table(src, task.alpha, task.beta)
        counts[coh] = table[rng.choice(len(probs), size=n_coh, p=probs)]
    add_classical_pairs(counts, np.where(coh, 0, n1), _A, src.p_late, rng)
    add_classical_pairs(counts, np.where(coh, 0, n2), _D, src.p_late, rng)
    clicks = sample_clicks(counts, np.array(task.eff), np.array(task.dark), rng)
    herald, window = classify_clicks(clicks)
    inside = np.abs(window) <= 2
    out = np.zeros(N_TALLY, dtype=np.int64)
    out[0:5] = np.bincount(window[herald & inside] + 2, minlength=5)
    out[5:10] = np.bincount(window[inside] + 2, minlength=5)
    out[10] = herald.sum()
    # more than one click on a fringe detector
    out[11] = ((clicks[:, _A].sum(axis=1) > 1) | (clicks[:, _D].sum(axis=1) > 1)).sum()
    return out


def strata(config: ExperimentConfig) -> list[tuple[tuple[int, int], float, int]]:
    """Stratum list: ((n1, n2), probability, simulated pulses).

    Strata with a pair in each crystal get pulses in proportion to their
    weight relative to (1, 1), capped at ``n_pulses``; every stratum gets at
    least 1 % of the budget.
    """
    src = config.source
    n = config.n_pulses
    if src.statistics == "fixed":
        return [((1, 1), 1.0, n)]
    if src.max_pairs is not None:
        kmax = src.max_pairs
    else:
        kmax = 1
        while 1.0 - pair_number_pmf(src, kmax).sum() > TAIL_CUTOFF and kmax < 40:
            kmax += 1
    pmf = pair_number_pmf(src, kmax)
    p11 = pmf[1] ** 2
    out = []
    for n1 in range(kmax + 1):
        for n2 in range(kmax + 1):
            p = float(pmf[n1] * pmf[n2])
            if p == 0.0:
                continue
            frac = min(1.0, p / p11) if (n1 and n2 and p11 > 0) else 0.0
            out.append(((n1, n2), p, max(1, math.ceil(n * max(frac, MIN_STRATUM_FRACTION)))))
    return out


def _blocks(total: int, size: int):
    for i, start in enumerate(range(0, total, size)):
        yield i, min(size, total - start)


def _execute(tasks: list[BlockTask], workers: int) -> list[np.ndarray]:
    if workers <= 1 or len(tasks) <= 1:
        return [simulate_block(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate_block, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_monte_carlo(config: ExperimentConfig, workers: int | None = None, fit: bool = True) -> ScanResult:
    """Simulate ``n_pulses`` per phase point and, unless ``fit`` is false, fit both fringes."""
    workers = default_workers() if workers is None else workers
    t0 = time.perf_counter()
    eff = tuple(float(x) for x in config.efficiencies())
    dark = tuple(float(x) for x in config.dark_probs())
    src = config.source
    direct = config.sampling == "direct"
    plan = [(None, 1.0, config.n_pulses)] if direct else strata(config)

    tasks, owners = [], []
    for bi, beta in enumerate(config.betas):
        for si, (pairs, _, m) in enumerate(plan):
            for blk, size in _blocks(m, config.block_size):
                key = (0, bi, blk) if direct else (1, bi, pairs[0], pairs[1], blk)
                tasks.append(BlockTask(config.master_seed, key, size, pairs, src, config.alpha, beta, eff, dark))
                owners.append((bi, si))
    results = _execute(tasks, workers)

    nb, ns = len(config.betas), len(plan)
    tallies = np.zeros((nb, ns, N_TALLY), dtype=np.int64)
    for (bi, si), t in zip(owners, results):
        tallies[bi, si] += t
    weights = np.array([p * config.n_pulses / m for _, p, m in plan])
    est = np.einsum("s,bst->bt", weights, tallies.astype(float))
    # Pulses outside (1, 1) are propagated classically and do not depend on
    # beta, so their count variance is estimated from all phase points at once.
    # This avoids zero-variance points when a rare stratum happens to be empty.
    raw = tallies.astype(float)
    classical = np.array([pairs != (1, 1) for pairs, _, _ in plan])
    pooled = np.where(classical[None, :, None], raw.mean(axis=0, keepdims=True), raw)
    var = np.einsum("s,bst->bt", weights**2, pooled)

    scan = ScanResult(
        config=config,
        betas=np.asarray(config.betas, dtype=float),
        conditioned=est[:, 2].copy(),
        unconditioned=est[:, 7].copy(),
        pulses=np.full(nb, float(config.n_pulses)),
        windows=est[:, 0:5].copy(),
        unconditioned_windows=est[:, 5:10].copy(),
        conditioned_var=None if direct else var[:, 2].copy(),
        unconditioned_var=None if direct else var[:, 7].copy(),
        metadata={
            "mode": "monte_carlo",
            "sampling": config.sampling,
            "raw_conditioned": int(tallies[:, :, 2].sum()),
            "raw_unconditioned": int(tallies[:, :, 7].sum()),
            "raw_windows": tallies[:, :, 0:5].sum(axis=1),
            "simulated_pulses": int(sum(m for *_, m in plan)) * nb,
            "dropped_pair_mass": float(1.0 - sum(p for _, p, _ in plan)) if not direct else 0.0,
            "workers": workers,
            "runtime_s": time.perf_counter() - t0,
        },
    )
    return scan.fit() if fit else scan


# -- per-pulse reference path ------------------------------------------------


def _classical_arrivals(photons, p_rng) -> list[tuple[str, int]]:
    out = []
    for label, b in photons:
        if label in ("B", "C"):
            out.append(("E" if p_rng.random() < 0.5 else "F", b))
        else:
            u = p_rng.random()
            acc = 0.0
            for shift, p in ANALYZER_ROUTES:
                acc += p
                if u < acc:
                    if shift is not None:
                        out.append((label, b + shift))
                    break
    return out


def simulate_events(config: ExperimentConfig, beta_index: int, n_pulses: int, start: int = 0):
    """Yield one CoincidenceEvent per pulse, pulse by pulse.

    Slow; used for event logs and to cross-check the vectorized kernel.
    """
    beta = config.betas[beta_index]
    src = config.source
    table, probs = coherent_table(src, config.alpha, beta)
    for pulse in range(start, start + n_pulses):
        rng = pulse_rng(config.master_seed, 2, beta_index, pulse)
        content = pulse_to_state(sample_pulse(src, rng, pulse), src)
        if isinstance(content, StateVector):
            row = table[rng.choice(len(probs), p=probs)]
            arrivals = [
                ("EFAD"[i], b) for i in range(4) for b in range(3) for _ in range(int(row[i, b]))
            ]
        else:
            arrivals = _classical_arrivals(content.photons(), rng)
        survivors = []
        for mode in "EFAD":
            det = MODE_DETECTOR[mode]
            channel = config.channels.for_detector(det)
            survivors += apply_transmission([(det, b) for m, b in arrivals if m == mode], channel, rng)
        clicks = detect(survivors, config.detectors, rng, pulse)
        yield coincidence_assemble(clicks, pulse)


def tally_events(events) -> np.ndarray:
    """Same tally layout as :func:`simulate_block`, from event records."""
    out = np.zeros(N_TALLY, dtype=np.int64)
    for ev in events:
        dt = ev.delta_tau_AD
        if dt is not None:
            out[5 + dt + 2] += 1
            if ev.bsa_success:
                out[dt + 2] += 1
        out[10] += ev.bsa_success
        out[11] += ev.multi_fringe_click
    return out

