import math

import numpy as np
import pytest

from tbswap.detection import (
    DETECTOR_ORDER,
    NO_WINDOW,
    ClickRecord,
    Detector,
    DetectorParams,
    bsa_classify,
    classify_clicks,
    click_probabilities,
    coincidence_assemble,
    detect,
    format_event,
    ge_apd,
    ideal_detectors,
    ingaas_apd,
    lab_detectors,
    sample_clicks,
    window_of,
)
from tbswap.source import pulse_rng

E, F, A, D = Detector.BSA_E, Detector.BSA_F, Detector.ALICE, Detector.BOB


def clicks(*spec):
    return [ClickRecord(d, b) for d, b in spec]


def test_presets():
    assert ingaas_apd().efficiency == 0.30
    assert ingaas_apd().dark_prob_per_gate == pytest.approx(1.2e-4)
    assert ge_apd().efficiency == 0.10
    assert lab_detectors()[E].name == "Ge"
    with pytest.raises(ValueError):
        DetectorParams(efficiency=1.5)
    with pytest.raises(ValueError):
        ClickRecord(A, 3)


def test_ideal_detection_mirrors_arrivals():
    arrivals = [(E, 0), (F, 1), (A, 2), (A, 2), (D, 1)]
    got = detect(arrivals, ideal_detectors(), pulse_rng(0, 0))
    assert sorted((c.detector, c.time_bin) for c in got) == sorted({(E, 0), (F, 1), (A, 2), (D, 1)})
    assert not any(c.is_dark for c in got)


def test_efficiency_statistics():
    p = ingaas_apd()
    counts = np.zeros((1_000_000, 4, 3), dtype=np.int16)
    counts[:, 2, 0] = 1
    eff = np.array([0.0, 0.0, p.efficiency, 0.0])
    k = sample_clicks(counts, eff, np.zeros(4), pulse_rng(1, 0))[:, 2, 0].sum()
    assert abs(k - 3e5) < 3 * math.sqrt(1e6 * 0.3 * 0.7)


def test_dark_statistics():
    dark = ingaas_apd().dark_prob_per_gate
    counts = np.zeros((10_000_000 // 12 + 1, 4, 3), dtype=np.int16)
    k = sample_clicks(counts, np.zeros(4), np.full(4, dark), pulse_rng(2, 0)).sum()
    gates = counts.shape[0] * 12
    assert abs(k - gates * dark) < 3 * math.sqrt(gates * dark)


def test_bsa_rule():
    assert bsa_classify(clicks((E, 0), (F, 1)))
    assert bsa_classify(clicks((E, 1), (F, 0)))
    assert not bsa_classify(clicks((E, 0), (F, 0)))
    assert not bsa_classify(clicks((E, 0), (E, 1)))
    assert not bsa_classify(clicks((E, 0), (F, 1), (F, 2)))
    assert not bsa_classify(clicks((E, 1), (F, 2)))
    assert bsa_classify(iter(clicks((E, 0), (F, 1))))


def test_windows_and_assembly():
    assert window_of(ClickRecord(A, 2), ClickRecord(D, 0)) == 2
    ev = coincidence_assemble(clicks((A, 1), (D, 1)), pulse_index=4)
    assert ev.delta_tau_AD == 0 and ev.unconditioned and not ev.conditioned
    ev = coincidence_assemble(clicks((E, 0), (F, 1), (A, 0), (D, 1)))
    assert ev.conditioned is False and ev.delta_tau_AD == -1 and ev.bsa_success
    ev = coincidence_assemble(clicks((A, 0), (A, 1), (D, 1)))
    assert ev.delta_tau_AD is None and ev.multi_fringe_click
    assert format_event(coincidence_assemble(clicks((E, 0)), 3)) == "3\tBSA_E@0\t0\t-"


def test_vectorized_classification_matches_records():
    rng = pulse_rng(4, 0)
    c = rng.random((2000, 4, 3)) < 0.25
    herald, window = classify_clicks(c)
    for i in range(len(c)):
        recs = [ClickRecord(DETECTOR_ORDER[r], g) for r in range(4) for g in range(3) if c[i, r, g]]
        ev = coincidence_assemble(recs)
        assert herald[i] == ev.bsa_success
        assert window[i] == (NO_WINDOW if ev.delta_tau_AD is None else ev.delta_tau_AD)


def test_click_probability_formula():
    counts = np.zeros((1, 4, 3), dtype=np.int16)
    counts[0, 0, 1] = 2
    p = click_probabilities(counts, np.full(4, 0.3), np.full(4, 0.01))
    assert p[0, 0, 1] == pytest.approx(1 - 0.99 * 0.49)
    assert p[0, 1, 1] == pytest.approx(0.01)
