"""Stability conditions and degree-1 Abel maps on nodal curves, combinatorially.

Curves are given by their dual graphs, sheaves by multidegrees and
polarizations by a rank and a multidegree; every check is exhaustive over
subcurves and uses exact arithmetic.
"""
from .curve import NodalCurve, Subcurve, build_curve, c_one, c_r, delta, modify
from .stability import Polarization, SheafClass, Verdict, beta, classify, enumerate_semistable, sheaf
from .twister import find_quasistable_twister, twister_difference, twister_multidegree
from .abel import DesingularizationChoice, resolve_abel_map
from .document import corpus, corpus_document, load_document

__version__ = "0.1.0"

__all__ = [
    "NodalCurve", "Subcurve", "build_curve", "c_one", "c_r", "delta", "modify",
    "Polarization", "SheafClass", "Verdict", "beta", "classify", "enumerate_semistable", "sheaf",
    "find_quasistable_twister", "twister_difference", "twister_multidegree",
    "DesingularizationChoice", "resolve_abel_map",
    "corpus", "corpus_document", "load_document",
]
