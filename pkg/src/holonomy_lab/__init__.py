"""Surface group representations into PSL2(R) and hyperbolic cone structures."""

__version__ = "0.1.0"
