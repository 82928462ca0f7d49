"""NIST SP 800-22 statistical test suite."""

from .battery import (BatteryConfig, BatteryResult, TestOutcome, TEST_NAMES,
                      proportion_threshold, run_battery, run_test, uniformity_p)
from .tests import InputSizeError, InsufficientCycles

__all__ = ["BatteryConfig", "BatteryResult", "TestOutcome", "TEST_NAMES",
           "proportion_threshold", "run_battery", "run_test", "uniformity_p",
           "InputSizeError", "InsufficientCycles"]
