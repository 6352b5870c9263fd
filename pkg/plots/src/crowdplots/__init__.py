"""Static figure rendering for experiment record CSVs."""

from .figures import FigureSpec, SchemaError, render

__version__ = "0.1.0"
