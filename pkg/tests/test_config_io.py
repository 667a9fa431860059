import dataclasses
import io
import math

import pytest

from tbswap import preset_path
from tbswap.config_io import ConfigError, emit_config, parse_config
from tbswap.detection import Detector
from tbswap.experiment import ExperimentConfig, beta_grid
from tbswap.source import MU_LAB, SourceParams


def test_minimal_file_gives_defaults():
    cfg = parse_config("[run]\nmode = analytic\n")
    assert cfg == ExperimentConfig()


def test_defaults_round_trip():
    cfg = ExperimentConfig()
    assert parse_config(emit_config(cfg)) == cfg


def test_custom_round_trip():
    cfg = ExperimentConfig(
        source=SourceParams(mu=0.2, xi=0.93, delta=0.1, statistics="thermal", max_pairs=3),
        alpha=0.25,
        betas=(0.0, 0.3, 1.0, 2.0, 4.0),
        mode="monte_carlo",
        sampling="direct",
        n_pulses=1234,
        master_seed=99,
        event_log=2,
    )
    text = emit_config(cfg)
    assert "betas = 0.0, 0.3, 1.0, 2.0, 4.0" in text
    assert parse_config(text) == cfg
    assert parse_config(io.StringIO(text)) == cfg


def test_lab_preset():
    cfg = parse_config(preset_path("lab"))
    assert cfg.tau_ns == 1.2
    assert cfg.rep_rate_hz == 75e6
    assert cfg.source.mu == pytest.approx(MU_LAB, abs=1e-15)
    assert cfg.source.xi == 0.95
    assert cfg.detectors[Detector.BSA_E].efficiency == 0.10
    assert cfg.detectors[Detector.BSA_E].dark_prob_per_gate == pytest.approx(40e3 / 75e6)
    for d in (Detector.BSA_F, Detector.ALICE, Detector.BOB):
        assert cfg.detectors[d].efficiency == 0.30
        assert cfg.detectors[d].dark_prob_per_gate == pytest.approx(1.2e-4)
    assert cfg.channels.alice.transmission == pytest.approx(0.95**1.1)
    assert cfg.betas == beta_grid(12)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[source]\nmu = -1\n", "source.mu"),
        ("[source]\nxyz = 1\n", "source.xyz"),
        ("[source]\nmu = abc\n", "source.mu"),
        ("[bogus]\n", "bogus"),
        ("[run]\nmode = fast\n", "run.mode"),
        ("[run]\nn_pulses = 1.5\n", "run.n_pulses"),
        ("[run]\nmode = mc\nn_pulses = 0\n", "run.n_pulses"),
        ("[analyzers]\nscan_points = 0\n", "analyzers.scan_points"),
        ("[analyzers]\nscan_points = 4\nbetas = 0, 1\n", "exclusive"),
        ("[detector.alice]\nefficiency = 2\n", "detector.alice"),
        ("[detector.bob]\ngated = maybe\n", "detector.bob.gated"),
        ("[channel.bob]\ntransmission = 0\n", "channel.bob"),
        ("[source]\nc0 = 1\n", "source.c0"),
        ("mu = 1\n", "malformed"),
    ],
)
def test_errors_name_the_field(text, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        parse_config(text)


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config(preset_path("lab").with_name("nope.ini"))


def test_mode_alias():
    assert parse_config("[run]\nmode = mc\n").mode == "monte_carlo"
    cfg = parse_config("[analyzers]\nscan_points = 8\nalpha = 0.5\n")
    assert cfg.betas == beta_grid(8) and math.isclose(cfg.alpha, 0.5)
    assert dataclasses.replace(cfg, alpha=0.0) != cfg
