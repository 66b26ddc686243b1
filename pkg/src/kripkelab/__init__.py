"""Finite Kripke frames, p-morphisms, modal algebras and an infinitary sequent
calculus, with bounded checks of interpolation and definability properties."""

from .frame import Frame, FrameClass, ParseError, check_class, parse_frame
from .morphism import PMorphism, classify, enumerate_pmorphisms, enumerate_subreductions
from .formula import Formula, parse_formula

__version__ = "0.1.0"

__all__ = ["Frame", "FrameClass", "ParseError", "check_class", "parse_frame", "PMorphism",
           "classify", "enumerate_pmorphisms", "enumerate_subreductions", "Formula",
           "parse_formula"]
