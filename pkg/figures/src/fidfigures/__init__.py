"""Figure rendering for fidinfer CLI payloads."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, PayloadError, render

__all__ = ["render", "PayloadError", "FIGURE_IDS", "__version__"]
