"""Models of the spin-orbit-perturbed A1Pi(v=6) // b3Sigma+(v=5) system of AlF.

The package builds hyperfine-resolved effective Hamiltonians for the coupled
A/b system and the a3Pi lower state, fits spectroscopic parameters to a
measured line list, predicts singlet-triplet mixing fractions and radiative
lifetimes, simulates spectra and implements an open two-level Lamb-dip model.
"""

__version__ = "0.1.0"

from .angular import HalfInt, clebsch_gordan, wigner3j, wigner6j
from .constants import CM1_TO_MHZ, MHZ_TO_CM1

__all__ = [
    "HalfInt",
    "wigner3j",
    "wigner6j",
    "clebsch_gordan",
    "CM1_TO_MHZ",
    "MHZ_TO_CM1",
]
