"""Rendering of spdclayers data exports into publication-style figures.

Pure presentation: consumes the frozen CSV schemas (schema tag, config hash
and body hash in the header) and never recomputes physics.
"""

from .reader import ExportError, read_export
from .render import KINDS, render

__version__ = "0.1.0"
