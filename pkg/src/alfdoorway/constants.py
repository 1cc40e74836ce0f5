"""Unit conversions and nuclear constants used throughout the package.

Internal unit is MHz everywhere; cm^-1 appears only at I/O boundaries.
"""

CM1_TO_MHZ = 29979.2458  # exact, c in cm/s * 1e-6
MHZ_TO_CM1 = 1.0 / CM1_TO_MHZ

# Nuclear spins (twice-values): 27Al I = 5/2, 19F I = 1/2.
TWICE_I_AL = 5
TWICE_I_F = 1
