"""Truncated spectral sequences of filtered complexes over A⊗Λ.

Subpackages: ``coefficients`` (the ring), ``complexes`` (filtered
complexes), ``engine`` (pages, morphisms, oracle), ``builders``
(quantized Morse complexes, Seidel decomposition), ``criteria`` and
``cli``.
"""

__version__ = "0.1.0"

from .coefficients import AlgebraPresentation, CoefficientRing, NovikovSystem
from .complexes import EXACT, FilteredComplex, build_complex
from .engine import Window, compute_page, page_differential
from .errors import QSerreError
from .model import Model, load_bundled, parse_model

__all__ = [
    "AlgebraPresentation",
    "CoefficientRing",
    "EXACT",
    "FilteredComplex",
    "Model",
    "NovikovSystem",
    "QSerreError",
    "Window",
    "build_complex",
    "compute_page",
    "load_bundled",
    "page_differential",
    "parse_model",
]
