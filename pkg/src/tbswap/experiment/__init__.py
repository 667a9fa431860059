"""Phase-scan orchestration: analytic prediction, Monte Carlo, oracle, fits."""

from .analytic import run_analytic, window_probabilities
from .config import Channels, ExperimentConfig, beta_grid
from .fitting import FitError, FitResult, fit_visibility, fringe_model
from .montecarlo import run_monte_carlo, simulate_events
from .oracle import OracleResult, TruncationWarning, oracle_truncated_enumeration
from .results import ScanResult, Summary, summarize, summarize_visibility


def run(config: ExperimentConfig, workers: int | None = None) -> ScanResult:
    if config.mode == "analytic":
        return run_analytic(config)
    return run_monte_carlo(config, workers)


__all__ = [
    "Channels",
    "ExperimentConfig",
    "FitError",
    "FitResult",
    "OracleResult",
    "ScanResult",
    "Summary",
    "TruncationWarning",
    "beta_grid",
    "fit_visibility",
    "fringe_model",
    "oracle_truncated_enumeration",
    "run",
    "run_analytic",
    "run_monte_carlo",
    "simulate_events",
    "summarize",
    "summarize_visibility",
    "window_probabilities",
]
