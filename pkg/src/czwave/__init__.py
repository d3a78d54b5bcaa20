"""czwave: Whitney multiresolution analysis of singular integrals on domains."""

__version__ = "0.1.0"
