"""Physical constants and unit conversions.

Everything inside the package works in Hartree atomic units; these factors
are only applied when writing output.
"""

HARTREE_TO_GHZ = 6.579683920502e6
AU_DIPOLE_TO_DEBYE = 2.541746
AMU_TO_ELECTRON_MASS = 1822.888486209

UNITS = {
    "hartree_to_ghz": HARTREE_TO_GHZ,
    "au_dipole_to_debye": AU_DIPOLE_TO_DEBYE,
    "amu_to_electron_mass": AMU_TO_ELECTRON_MASS,
}

SYMMETRY_M = {"sigma": 0, "pi": 1, "delta": 2, "phi": 3, "gamma": 4}

# curve names by dominant electron-perturber partial wave
MOLECULE_LABELS = {0: "trilobite", 1: "butterfly", 2: "dragonfly", 3: "firefly", 4: "gadfly"}


def hartree_to_ghz(energy):
    return energy * HARTREE_TO_GHZ


def au_to_debye(dipole):
    return dipole * AU_DIPOLE_TO_DEBYE
