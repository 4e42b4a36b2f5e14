"""Tactical decision engine for simulated 2D soccer.

Subpackages cover the world model, pass kinematics, dataset extraction,
the trainable pass predictor, unmark decisioning and positioning, the
strategy chains, and the benchmark harness.
"""
from .config import Config, DEFAULT_CONFIG, load_config, parse_config_text

__version__ = "0.1.0"

__all__ = ["Config", "DEFAULT_CONFIG", "load_config", "parse_config_text", "__version__"]
