"""Registered one-dimensional basis families."""

from .base_family import BasisFamily1D
from .families.fourier_family import FourierFamily
from .families.legendre_family import LegendreFamily

# List of all families - tensor bases are built from one of these per axis
FAMILIES = [
    LegendreFamily,
    FourierFamily,
]

_INSTANCES = {cls.family_name: cls() for cls in FAMILIES}


def get_family(name: str) -> BasisFamily1D:
    """Look up a family instance by its name ('legendre' or 'fourier')."""
    try:
        return _INSTANCES[name]
    except KeyError:
        raise ValueError(
            f"Unknown basis family '{name}', expected one of {sorted(_INSTANCES)}"
        ) from None
