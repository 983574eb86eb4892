"""Dyadic network-formation models: estimation under transferable and
non-transferable utility, a boundary-corrected transferability test, and the
simulation studies backing both."""

__version__ = "0.1.0"
