"""Unit system used throughout the package: eV, fs, Angstrom."""

HBAR = 0.6582119569  # eV fs
C_LIGHT = 2997.92458  # Angstrom / fs
K_BOLTZMANN = 8.617333262e-5  # eV / K


def mass_from_mev(rest_energy_mev: float) -> float:
    """Convert a rest energy in MeV (mass in MeV/c^2) to eV fs^2 / Angstrom^2."""
    return rest_energy_mev * 1.0e6 / C_LIGHT**2


PROTON_MASS = mass_from_mev(938.0)
ROOM_KT = 0.0259  # eV, ~300 K
