"""Data models for encoded manifold functions."""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .basis import BasisSpec, make_basis
from .errors import BlockNotPresentError, DataError


class Normalization(str, Enum):
    """Whether the 1 / H^k(M) factor was applied to the blocks."""

    RAW = "raw"
    MEASURE_NORMALIZED = "measure_normalized"


@dataclass
class Provenance:
    """How the coefficients were integrated."""

    method: str = "quadrature"  # "quadrature" or "monte-carlo"
    degree: Optional[int] = None  # Quadrature degree (quadrature only)
    samples: Optional[int] = None  # Node or sample count
    seed: Optional[int] = None  # RNG seed (monte-carlo only)
    shape_omitted: bool = False  # Point clouds carry no Hausdorff shape block

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "degree": self.degree,
            "samples": self.samples,
            "seed": self.seed,
            "shape_omitted": self.shape_omitted,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Provenance":
        return cls(
            method=data.get("method", "quadrature"),
            degree=data.get("degree"),
            samples=data.get("samples"),
            seed=data.get("seed"),
            shape_omitted=data.get("shape_omitted", False),
        )


@dataclass
class EncodedVector:
    """Named coefficient blocks of one manifold function under one basis."""

    basis: BasisSpec
    blocks: Dict[str, np.ndarray]
    normalization: Normalization = Normalization.RAW
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        """Coerce blocks and check their lengths."""
        blocks = {}
        for name, values in self.blocks.items():
            values = np.asarray(values, dtype=float).ravel()
            if len(values) != self.basis.kappa:
                raise DataError(
                    f"Block '{name}' has {len(values)} entries, expected {self.basis.kappa}"
                )
            if not np.all(np.isfinite(values)):
                raise DataError(f"Block '{name}' has non-finite entries")
            blocks[name] = values
        self.blocks = blocks
        self.normalization = Normalization(self.normalization)

    @property
    def shape(self) -> np.ndarray:
        return self.block("shape")

    @property
    def function(self) -> np.ndarray:
        return self.block("function")

    def block(self, name: str) -> np.ndarray:
        try:
            return self.blocks[name]
        except KeyError:
            raise BlockNotPresentError(
                f"Block '{name}' not present (have {sorted(self.blocks)})"
            ) from None

    @property
    def content_hash(self) -> str:
        """Hash of the header and the exact coefficient bytes."""
        digest = hashlib.sha256(repr(self.header()).encode())
        for name in sorted(self.blocks):
            digest.update(self.blocks[name].astype("<f8").tobytes())
        return digest.hexdigest()[:16]

    def header(self) -> dict:
        """Everything except the coefficients."""
        return {
            "basis": self.basis.to_dict(),
            "normalization": self.normalization.value,
            "provenance": self.provenance.to_dict(),
            "blocks": [{"name": n, "length": len(v)} for n, v in self.blocks.items()],
        }

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        data = self.header()
        data["coefficients"] = {n: v.tolist() for n, v in self.blocks.items()}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EncodedVector":
        """Create instance from dictionary."""
        basis = data["basis"]
        return cls(
            basis=make_basis(basis["family"], basis["n"], basis["d"]),
            blocks={n: np.asarray(v) for n, v in data.get("coefficients", {}).items()},
            normalization=Normalization(data.get("normalization", "raw")),
            provenance=Provenance.from_dict(data.get("provenance", {})),
        )

    def matches(self, other: "EncodedVector") -> bool:
        """Same basis, normalization and bit-identical blocks."""
        return self.content_hash == other.content_hash
