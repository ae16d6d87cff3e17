"""Figure rendering for log-gas simulation output directories."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, MissingColumnError, render
