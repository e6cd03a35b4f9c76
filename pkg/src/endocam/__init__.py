"""Simulator for a normal-following autonomous endoscope camera on the wire-chaser task."""

__version__ = "0.1.0"
