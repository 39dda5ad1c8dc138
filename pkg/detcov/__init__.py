"""
detcov: spatial coverage measurement and combination of local feature detectors.
"""

__version__ = "1.0.0"
