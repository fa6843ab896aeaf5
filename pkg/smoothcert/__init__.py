"""smoothcert - certified radii for randomized smoothing with ESG and EGG noise."""

__version__ = "1.0.0"
