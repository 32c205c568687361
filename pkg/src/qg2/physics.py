"""Nondimensional parameter groups and diagnostic length scales."""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "PhysicalParams",
    "LayerCoupling",
    "derived_A",
    "munk_scale",
    "kolmogorov_scale",
]


def derived_A(Ro: float, Re: float) -> float:
    """Lateral eddy viscosity coefficient, Ro / Re."""
    if Re == 0:
        raise ZeroDivisionError("Re must be nonzero")
    return Ro / Re


@dataclass(frozen=True)
class PhysicalParams:
    """Nondimensional groups of the two-layer model.

    Ro, Re, Fr are the Rossby, Reynolds (eddy-viscosity based), and Froude
    numbers; sigma is the Ekman bottom-friction coefficient; delta the layer
    depth ratio H1/(H1+H2); L the characteristic meridional length. A = Ro/Re
    is derived at construction.
    """

    Ro: float
    Re: float
    Fr: float = 0.0
    sigma: float = 0.0
    delta: float = 0.5
    L: float = 1.0
    A: float = field(init=False)

    def __post_init__(self):
        if not self.Ro > 0:
            raise ValueError(f"Ro must be positive, got {self.Ro}")
        if not self.Re > 0:
            raise ValueError(f"Re must be positive, got {self.Re}")
        if self.Fr < 0:
            raise ValueError(f"Fr must be nonnegative, got {self.Fr}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "A", derived_A(self.Ro, self.Re))

    @property
    def coupling(self) -> "LayerCoupling":
        return LayerCoupling.from_params(self)


@dataclass(frozen=True)
class LayerCoupling:
    """Asymmetric layer-coupling weights: c1 = Fr/delta, c2 = Fr/(1-delta).

    c1 weights how the bottom layer drives the top layer, c2 the reverse;
    a thin top layer (small delta) feels the bottom layer strongly.
    """

    c1: float
    c2: float

    @classmethod
    def from_params(cls, p: PhysicalParams) -> "LayerCoupling":
        return cls(c1=p.Fr / p.delta, c2=p.Fr / (1.0 - p.delta))


def munk_scale(p: PhysicalParams) -> float:
    """Munk scale L (Ro/Re)^(1/3); resolving simulations need h below it."""
    return p.L * (p.Ro / p.Re) ** (1.0 / 3.0)


def kolmogorov_scale(p: PhysicalParams) -> float:
    """Kolmogorov-like scale Re^(-3/4) L."""
    return p.Re ** (-0.75) * p.L
