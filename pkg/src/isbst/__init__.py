"""Interactive search-based testing workbench for the Time Ramp module."""

__version__ = "0.1.0"
