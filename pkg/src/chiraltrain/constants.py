"""Physical constants in the unit system used throughout: cm^-1 for energies,
femtoseconds for times, Kelvin for temperatures."""

# Speed of light in cm/fs. Converts an energy in cm^-1 to a frequency in 1/fs.
C_CM_FS = 2.99792458e-5

# Second radiation constant h*c/k_B in cm*K. exp(-E * C2_CM_K / T) is the
# Boltzmann factor for an energy E in cm^-1 at temperature T in K.
C2_CM_K = 1.4387768775039337

# Speed of light in nm/fs, for converting a carrier wavelength to an angular
# frequency in rad/fs.
C_NM_FS = 299.792458
