"""Conley-Zehnder indices, Rabinowitz-Floer chain models and Morse flows for Brieskorn manifolds."""

from .errors import BrieskornRFHError, InputError, MathError

__version__ = "0.1.0"

__all__ = ["BrieskornRFHError", "InputError", "MathError", "__version__"]
