"""Time-bin entanglement swapping simulator."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"


def preset_path(name: str = "lab") -> Path:
    """Path of a shipped experiment file."""
    return Path(str(resources.files(__package__) / "presets" / f"{name}.ini"))
