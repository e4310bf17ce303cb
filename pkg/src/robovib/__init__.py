"""Vibration diagnostics for robotic machining.

Impact waterfalls and modal peak tracking, rotation-order diagnosis of the
spindle, and envelope analysis of milling vibration, with a synthetic
signal generator to verify each stage.
"""

__version__ = "0.1.0"
