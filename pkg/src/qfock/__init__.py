"""Q-deformed Fock spaces over a finite site set, realised as explicit matrices."""
from .kernel import (
    QKernel,
    anyon_fermion_kernel,
    constant_kernel,
    derive_g,
    derive_r,
    make_kernel,
    random_kernel,
)
from .permgroup import Permutation, all_permutations, reduced_word

__version__ = "0.1.0"

__all__ = [
    "Permutation",
    "QKernel",
    "all_permutations",
    "anyon_fermion_kernel",
    "constant_kernel",
    "derive_g",
    "derive_r",
    "make_kernel",
    "random_kernel",
    "reduced_word",
]
