"""Closed-form limits on phase sensing and interaction speed for athermal states."""
__version__ = "0.1.0"
