"""Compile matrix product states into layered circuits of one- and two-qubit gates."""

__version__ = "0.1.0"
