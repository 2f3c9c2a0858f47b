"""
Configuration Module

This module holds the default settings for balancing and I/O, reads overrides
from the environment (and a local .env file), and resolves the per-run
configuration used by the command line front end.
"""

import logging
import operator
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

from dotenv import load_dotenv

from errors import ParameterError

logger = logging.getLogger(__name__)

# Format selectors
TEXT = "text"
BINARY = "binary"
AUTO = "auto"
FORMATS = (TEXT, BINARY, AUTO)

# Permutation selectors for `build`
PERMUTATIONS = ("lf", "fl", "phi", "phi-inv")

# Verify depths
QUICK = "quick"
FULL = "full"

MIN_ALPHA = 2
MAX_ALPHA = 2**63 - 1

DEFAULT_SETTINGS = {
    "alpha": 4,
    "format": AUTO,
    "log_level": "WARNING",
    "verify_samples": 4096,
    "seed": 0,
}

SWEEP_ALPHAS = (2, 4, 8, 16)

ENV_PREFIX = "RLMOVE_"


def check_alpha(alpha):
    """
    Validate the balancing parameter.

    Args:
        alpha (int): Candidate balancing parameter

    Returns:
        int: The same value

    Raises:
        ParameterError: If alpha is not an integer in [2, 2**63)
    """
    if isinstance(alpha, bool):
        raise ParameterError(f"alpha must be an integer, got {alpha!r}")
    try:
        alpha = operator.index(alpha)
    except TypeError:
        raise ParameterError(f"alpha must be an integer, got {alpha!r}") from None
    if alpha < MIN_ALPHA:
        raise ParameterError(f"alpha must be at least {MIN_ALPHA}, got {alpha}")
    if alpha > MAX_ALPHA:
        raise ParameterError(f"alpha must be in [{MIN_ALPHA}, 2**63), got {alpha}")
    return alpha


class SettingsManager:
    """
    Manager class for process-wide defaults.
    """

    def __init__(self, env_file=None):
        """
        Load defaults, then apply RLMOVE_* environment overrides.

        Args:
            env_file (str, optional): Path of a .env file to read first
        """
        load_dotenv(env_file)
        self.alpha = DEFAULT_SETTINGS["alpha"]
        self.format = DEFAULT_SETTINGS["format"]
        self.log_level = DEFAULT_SETTINGS["log_level"]
        self.verify_samples = DEFAULT_SETTINGS["verify_samples"]
        self.seed = DEFAULT_SETTINGS["seed"]
        self.reload()

    def reload(self):
        """Re-read the environment overrides."""
        env = os.environ
        if ENV_PREFIX + "ALPHA" in env:
            self.set_alpha(env[ENV_PREFIX + "ALPHA"])
        if ENV_PREFIX + "FORMAT" in env:
            self.set_format(env[ENV_PREFIX + "FORMAT"])
        if ENV_PREFIX + "LOG_LEVEL" in env:
            self.set_log_level(env[ENV_PREFIX + "LOG_LEVEL"])
        if ENV_PREFIX + "VERIFY_SAMPLES" in env:
            self.set_verify_samples(env[ENV_PREFIX + "VERIFY_SAMPLES"])
        if ENV_PREFIX + "SEED" in env:
            self.set_seed(env[ENV_PREFIX + "SEED"])

    def set_alpha(self, value):
        """
        Set the default balancing parameter.

        Args:
            value (int | str): New alpha

        Returns:
            bool: True if alpha was set, False otherwise
        """
        try:
            self.alpha = check_alpha(int(value))
        except (TypeError, ValueError) as e:
            logger.error(f"Invalid alpha '{value}': {str(e)}")
            return False
        logger.debug(f"Default alpha set to: {self.alpha}")
        return True

    def set_format(self, value):
        """
        Set the default RLBWT input format.

        Args:
            value (str): One of 'text', 'binary', 'auto'

        Returns:
            bool: True if the format was set, False otherwise
        """
        value = str(value).strip().lower()
        if value not in FORMATS:
            logger.error(f"Unknown format '{value}'")
            return False
        self.format = value
        return True

    def set_log_level(self, value):
        """
        Set the log level name used by the command line front end.

        Returns:
            bool: True if the level was recognised, False otherwise
        """
        name = str(value).strip().upper()
        if not isinstance(logging.getLevelName(name), int):
            logger.error(f"Unknown log level '{value}'")
            return False
        self.log_level = name
        return True

    def set_verify_samples(self, value):
        """Set how many positions a full verify compares."""
        try:
            samples = int(value)
        except (TypeError, ValueError):
            logger.error(f"Invalid sample count '{value}'")
            return False
        if samples < 1:
            logger.error(f"Sample count must be positive, got {samples}")
            return False
        self.verify_samples = samples
        return True

    def set_seed(self, value):
        """Set the seed for sampled verification."""
        try:
            self.seed = int(value)
        except (TypeError, ValueError):
            logger.error(f"Invalid seed '{value}'")
            return False
        return True


@dataclass(frozen=True)
class Config:
    """Resolved configuration for one command line invocation."""

    subcommand: str
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    rlbwt_path: Optional[str] = None
    alpha: int = DEFAULT_SETTINGS["alpha"]
    format: str = AUTO
    output_format: str = TEXT
    perm: str = "lf"
    stats: bool = False
    verify_depth: str = QUICK
    verify_samples: int = DEFAULT_SETTINGS["verify_samples"]
    seed: int = DEFAULT_SETTINGS["seed"]
    alphas: Tuple[int, ...] = field(default=SWEEP_ALPHAS)
    csv: bool = False
    kv: bool = False

    def __post_init__(self):
        check_alpha(self.alpha)
        for alpha in self.alphas:
            check_alpha(alpha)
        if self.format not in FORMATS:
            raise ParameterError(f"unknown format '{self.format}'")
        if self.output_format not in (TEXT, BINARY):
            raise ParameterError(f"unknown output format '{self.output_format}'")
        if self.perm not in PERMUTATIONS:
            raise ParameterError(f"unknown permutation '{self.perm}'")
        if self.verify_depth not in (QUICK, FULL):
            raise ParameterError(f"unknown verify depth '{self.verify_depth}'")


# Create a singleton instance
settings = SettingsManager()
