"""Certified and simulated tail bounds for Rademacher and sphere-weighted sums."""

__version__ = "0.1.0"
