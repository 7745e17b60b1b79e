"""Physical constants (CODATA 2018), SI units."""

HBAR = 1.054571817e-34        # J s
G_NEWTON = 6.67430e-11        # m^3 kg^-1 s^-2
C_LIGHT = 299792458.0         # m s^-1
MU_0 = 1.25663706212e-6       # N A^-2
MU_B = 9.2740100783e-24       # J T^-1
ATOMIC_MASS = 1.66053906660e-27  # kg

# convenience: mass of a potassium-39 atom, the workhorse dipolar species
M_K39 = 38.9637064864 * ATOMIC_MASS
