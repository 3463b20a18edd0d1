"""
chaincontrol - controllability of chain-coupled quantum systems driven by a
single local actuator, and binary-switch gate synthesis.
"""

__version__ = "0.1.0"
