"""Symmetric (quasi-)extension certificates and local hidden variable
models for bipartite quantum states, via semidefinite programming."""

from . import extensions, lhv, sdp, states, tensor  # noqa: F401

__version__ = "0.1.0"
