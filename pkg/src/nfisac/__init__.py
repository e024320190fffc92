"""Slot-level simulator for secure near-field MIMO ISAC with a Bayesian-Stackelberg controller."""
from .config import ConfigError, ScenarioConfig, load_config, preset_config
from .game_controller import CONTROLLER_NAMES, make_controller, run_episode
from .kernels import BACKEND
from .runner import emit_results, run_campaign
from .world import World

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CONTROLLER_NAMES", "ConfigError", "ScenarioConfig", "World", "__version__",
    "emit_results", "load_config", "make_controller", "preset_config", "run_campaign", "run_episode",
]
