"""Cluster complexes, evolution flows and their foliations."""

from .store import ComplexStore, enumerate_complex
from .tropical import Seed, load_quiver, mutate_b, mutate_seed, preset, root_seed, shift_seed

__all__ = [
    "ComplexStore",
    "Seed",
    "enumerate_complex",
    "load_quiver",
    "mutate_b",
    "mutate_seed",
    "preset",
    "root_seed",
    "shift_seed",
]
