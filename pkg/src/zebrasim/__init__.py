"""zebrasim: pedestrian-AV zebra-crossing simulation and optimisation."""

__version__ = "0.1.0"

from .engine import Trace, active_backend, detect_collision, run_trial
from .world import ScenarioConfig, conflict_zone

__all__ = ["ScenarioConfig", "Trace", "active_backend", "conflict_zone",
           "detect_collision", "run_trial", "__version__"]
