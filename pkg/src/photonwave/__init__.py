"""Photon wave mechanics: momentum-space states, Poincare generators,
Riemann-Silberstein fields, a truncated Fock layer and blackbody radiometry."""

__version__ = "0.1.0"

from .constants import NATURAL, SI, PhysicalConstants  # noqa: E402

__all__ = ["__version__", "PhysicalConstants", "SI", "NATURAL"]
