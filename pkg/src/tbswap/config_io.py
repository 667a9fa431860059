"""INI-style experiment files.

Sections: ``[source]``, ``[analyzers]``, ``[channel.alice|bob|bsa]``,
``[detector.bsa_e|bsa_f|alice|bob]``, ``[timing]`` and ``[run]``. Every key is
optional; omitted keys take the defaults of :class:`ExperimentConfig`.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from pathlib import Path

from .detection import DETECTOR_ORDER, DetectorParams
from .experiment.config import Channels, ExperimentConfig, beta_grid
from .optics import ChannelParams
from .source import SourceParams


class ConfigError(ValueError):
    pass


_DEFAULT = ExperimentConfig()
_CHANNELS = ("alice", "bob", "bsa")
_DETECTORS = {d.value.lower(): d for d in DETECTOR_ORDER}
_SOURCE_KEYS = {f.name for f in dataclasses.fields(SourceParams)}
_CHANNEL_KEYS = {f.name for f in dataclasses.fields(ChannelParams)}
_DETECTOR_KEYS = {f.name for f in dataclasses.fields(DetectorParams)}
_RUN_KEYS = {"mode", "sampling", "n_pulses", "seed", "block_size", "event_log"}
_MODE_ALIASES = {"mc": "monte_carlo", "monte_carlo": "monte_carlo", "analytic": "analytic"}


def _float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from None


def _int(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}") from None


def _bool(section, key, raw):
    v = raw.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{section}.{key}: expected true/false, got {raw!r}")


def _check_keys(section: str, keys, allowed) -> None:
    unknown = sorted(set(keys) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: " + ", ".join(f"{section}.{k}" for k in unknown))


def _build(section: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        # messages that already start with a dotted field name are kept as is
        named = "." in msg.split(" ", 1)[0]
        raise ConfigError(msg if named else f"{section}: {msg}") from None


def _replacer(base):
    return lambda **changes: dataclasses.replace(base, **changes)


def parse_config(source: str | Path | io.TextIOBase) -> ExperimentConfig:
    """Read and validate an experiment file (path, open file or INI text)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
            with open(source, encoding="utf-8") as fh:
                cp.read_file(fh)
        elif isinstance(source, str):
            cp.read_string(source)
        else:
            cp.read_file(source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None

    known = {"source", "analyzers", "timing", "run"} | {f"channel.{c}" for c in _CHANNELS}
    known |= {f"detector.{d}" for d in _DETECTORS}
    unknown = sorted(set(cp.sections()) - known)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")

    def sec(name):
        return dict(cp[name]) if cp.has_section(name) else {}

    s = sec("source")
    _check_keys("source", s, _SOURCE_KEYS)
    kw = {}
    for k, v in s.items():
        if k == "statistics":
            kw[k] = v.strip()
        elif k == "max_pairs":
            kw[k] = None if v.strip().lower() in ("none", "") else _int("source", k, v)
        else:
            kw[k] = _float("source", k, v)
    if ("c0" in kw) != ("c1" in kw):
        raise ConfigError("source.c0 and source.c1 must be given together")
    src = _build("source", SourceParams, **kw)

    a = sec("analyzers")
    _check_keys("analyzers", a, {"alpha", "betas", "scan_points"})
    if "betas" in a and "scan_points" in a:
        raise ConfigError("analyzers.betas and analyzers.scan_points are exclusive")
    alpha = _float("analyzers", "alpha", a["alpha"]) if "alpha" in a else _DEFAULT.alpha
    betas = _DEFAULT.betas
    if "betas" in a:
        items = [x for x in a["betas"].replace("\n", ",").split(",") if x.strip()]
        betas = tuple(_float("analyzers", "betas", x) for x in items)
    elif "scan_points" in a:
        n = _int("analyzers", "scan_points", a["scan_points"])
        if n <= 0:
            raise ConfigError(f"analyzers.scan_points must be > 0, got {n}")
        betas = beta_grid(n)

    channels = {}
    for c in _CHANNELS:
        d = sec(f"channel.{c}")
        _check_keys(f"channel.{c}", d, _CHANNEL_KEYS)
        base = getattr(_DEFAULT.channels, c)
        vals = {k: _float(f"channel.{c}", k, v) for k, v in d.items()}
        channels[c] = _build(f"channel.{c}", _replacer(base), **vals) if vals else base

    detectors = {}
    for key, det in _DETECTORS.items():
        d = sec(f"detector.{key}")
        name = f"detector.{key}"
        _check_keys(name, d, _DETECTOR_KEYS)
        vals = {}
        for k, v in d.items():
            if k == "name":
                vals[k] = v.strip()
            elif k == "gated":
                vals[k] = _bool(name, k, v)
            else:
                vals[k] = _float(name, k, v)
        base = _DEFAULT.detectors[det]
        detectors[det] = _build(name, _replacer(base), **vals) if vals else base

    t = sec("timing")
    _check_keys("timing", t, {"tau_ns", "rep_rate_hz"})
    timing = {k: _float("timing", k, v) for k, v in t.items()}

    r = sec("run")
    _check_keys("run", r, _RUN_KEYS)
    run = {}
    if "mode" in r:
        mode = r["mode"].strip()
        if mode not in _MODE_ALIASES:
            raise ConfigError(f"run.mode must be analytic or mc, got {mode!r}")
        run["mode"] = _MODE_ALIASES[mode]
    if "sampling" in r:
        run["sampling"] = r["sampling"].strip()
    for k in ("n_pulses", "block_size", "event_log"):
        if k in r:
            run[k] = _int("run", k, r[k])
    if "seed" in r:
        run["master_seed"] = _int("run", "seed", r["seed"])
    if run.get("event_log", 0) < 0:
        raise ConfigError("run.event_log must be >= 0")

    return _build(
        "run",
        ExperimentConfig,
        source=src,
        alpha=alpha,
        betas=betas,
        channels=Channels(**channels),
        detectors=detectors,
        **timing,
        **run,
    )


def config_sections(config: ExperimentConfig) -> dict[str, dict[str, str]]:
    """Config as ordered {section: {key: text}}; floats keep full precision."""
    fmt = repr
    src = config.source
    out: dict[str, dict[str, str]] = {
        "source": {
            "mu": fmt(src.mu),
            "delta": fmt(src.delta),
            "c0": fmt(src.c0),
            "c1": fmt(src.c1),
            "xi": fmt(src.xi),
            "statistics": src.statistics,
            "max_pairs": "none" if src.max_pairs is None else str(src.max_pairs),
        }
    }
    n = len(config.betas)
    an = {"alpha": fmt(config.alpha)}
    if tuple(config.betas) == beta_grid(n):
        an["scan_points"] = str(n)
    else:
        an["betas"] = ", ".join(fmt(float(b)) for b in config.betas)
    out["analyzers"] = an
    for c in _CHANNELS:
        ch = getattr(config.channels, c)
        out[f"channel.{c}"] = {k: fmt(getattr(ch, k)) for k in ("length_km", "transmission", "latency_s")}
    for key, det in _DETECTORS.items():
        p = config.detectors[det]
        out[f"detector.{key}"] = {
            "name": p.name,
            "efficiency": fmt(p.efficiency),
            "dark_prob_per_gate": fmt(p.dark_prob_per_gate),
            "gated": "true" if p.gated else "false",
        }
    out["timing"] = {"tau_ns": fmt(config.tau_ns), "rep_rate_hz": fmt(config.rep_rate_hz)}
    out["run"] = {
        "mode": config.mode,
        "sampling": config.sampling,
        "n_pulses": str(config.n_pulses),
        "seed": str(config.master_seed),
        "block_size": str(config.block_size),
        "event_log": str(config.event_log),
    }
    return out


def emit_config(config: ExperimentConfig) -> str:
    lines = []
    for section, items in config_sections(config).items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)

