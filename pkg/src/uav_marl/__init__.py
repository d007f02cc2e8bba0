"""Multi-agent deep RL for UAV relays under jamming: simulator, CTDE learner, baselines."""

from .config import ConfigError, RunConfig, load_config

__all__ = ["ConfigError", "RunConfig", "load_config"]
__version__ = "0.1.0"
