"""Filter-selection optimization on a simulated noisy spectrometer."""

__version__ = "0.1.0"
