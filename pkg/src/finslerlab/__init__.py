"""finslerlab: numerical Landsberg/Berwald verification for Finsler metrics."""

__version__ = "0.1.0"
