"""Physical constants in one record, switchable between SI and natural units."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants used throughout the package.

    ``h`` is kept consistent with ``hbar`` (``h = 2*pi*hbar``) in every profile.
    """

    hbar: float
    c: float
    epsilon_0: float
    mu_0: float
    k_B: float
    name: str = "custom"

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def hc(self) -> float:
        return self.h * self.c

    def as_dict(self) -> dict:
        d = asdict(self)
        d["h"] = self.h
        return d

    @classmethod
    def from_profile(cls, profile: str) -> "PhysicalConstants":
        try:
            return {"SI": SI, "si": SI, "natural": NATURAL}[profile]
        except KeyError:
            raise ValueError(f"unknown constants profile {profile!r} (use 'SI' or 'natural')") from None


SI = PhysicalConstants(
    hbar=_sc.hbar,
    c=_sc.c,
    epsilon_0=_sc.epsilon_0,
    mu_0=_sc.mu_0,
    k_B=_sc.k,
    name="SI",
)

# hbar = c = eps0 = mu0 = k_B = 1
NATURAL = PhysicalConstants(hbar=1.0, c=1.0, epsilon_0=1.0, mu_0=1.0, k_B=1.0, name="natural")
