"""Distributed deep Q-learning with experience sharing over social topologies."""

__version__ = "0.1.0"
