"""
Configuration management module.
Handles loading and validation of solver configuration from environment variables.
"""

import os
import logging

logger = logging.getLogger(__name__)


def _optional_int(value):
    """Convert an optional environment string to int (None when unset or empty)."""
    if value is None or value.strip() == "":
        return None
    return int(value)


class Config:
    """Configuration class for the folip solver."""

    def __init__(self):
        """Initialize configuration from environment variables."""
        # Limits
        self.time_limit = float(os.getenv("FOLIP_TIME_LIMIT", "1800"))  # 30 minute cutoff
        self.node_limit = _optional_int(os.getenv("FOLIP_NODE_LIMIT"))
        self.cut_rounds = _optional_int(os.getenv("FOLIP_CUT_ROUNDS"))
        self.gap = float(os.getenv("FOLIP_GAP", "1e-6"))

        # LP tolerances
        self.feas_tol = float(os.getenv("FOLIP_FEAS_TOL", "1e-7"))
        self.opt_tol = float(os.getenv("FOLIP_OPT_TOL", "1e-7"))
        self.pivot_tol = float(os.getenv("FOLIP_PIVOT_TOL", "1e-9"))
        self.stall_limit = int(os.getenv("FOLIP_STALL_LIMIT", "50"))
        self.iteration_limit = int(os.getenv("FOLIP_ITERATION_LIMIT", "100000"))

        # Branch-and-cut
        self.int_tol = float(os.getenv("FOLIP_INT_TOL", "1e-6"))
        self.sep_eps = float(os.getenv("FOLIP_SEP_EPS", "1e-6"))
        self.cut_limit = int(os.getenv("FOLIP_CUT_LIMIT", "500"))
        self.row_aging = os.getenv("FOLIP_ROW_AGING", "false").lower() == "true"
        self.row_age = int(os.getenv("FOLIP_ROW_AGE", "10"))
        self.minimal_model = os.getenv("FOLIP_MINIMAL_MODEL", "false").lower() == "true"
        self.eager = os.getenv("FOLIP_EAGER", "false").lower() == "true"
        self.trace_separation = os.getenv("FOLIP_TRACE_SEPARATION", "false").lower() == "true"

        # MLN frontend
        self.iff = os.getenv("FOLIP_IFF", "true").lower() == "true"

    def validate(self):
        """
        Validate configuration values.

        Returns:
            bool: True if every value is usable, False otherwise
        """
        valid = True
        if self.time_limit <= 0:
            logger.error(f"FOLIP_TIME_LIMIT must be positive, got {self.time_limit}")
            valid = False
        if self.node_limit is not None and self.node_limit <= 0:
            logger.error(f"FOLIP_NODE_LIMIT must be positive, got {self.node_limit}")
            valid = False
        if self.cut_rounds is not None and self.cut_rounds <= 0:
            logger.error(f"FOLIP_CUT_ROUNDS must be positive, got {self.cut_rounds}")
            valid = False
        if self.gap < 0:
            logger.error(f"FOLIP_GAP must be nonnegative, got {self.gap}")
            valid = False
        for name in ("feas_tol", "opt_tol", "pivot_tol", "int_tol", "sep_eps"):
            value = getattr(self, name)
            if not 0 <= value < 0.5:
                logger.error(f"Tolerance {name} must lie in [0, 0.5), got {value}")
                valid = False
        if self.cut_limit <= 0:
            logger.error(f"FOLIP_CUT_LIMIT must be positive, got {self.cut_limit}")
            valid = False
        if self.row_age <= 0:
            logger.error(f"FOLIP_ROW_AGE must be positive, got {self.row_age}")
            valid = False
        if self.stall_limit <= 0 or self.iteration_limit <= 0:
            logger.error("FOLIP_STALL_LIMIT and FOLIP_ITERATION_LIMIT must be positive")
            valid = False
        return valid
