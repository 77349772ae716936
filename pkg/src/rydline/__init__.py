"""Ultralong-range Rydberg molecule curves, ion-pair model and vibrational series."""
__version__ = "0.1.0"
