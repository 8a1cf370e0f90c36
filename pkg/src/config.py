"""Runtime settings and training presets."""

import os
from typing import List, Literal

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables (home first, project-local overrides)
load_dotenv(os.path.expanduser("~/.env"))
load_dotenv(".env", override=True)


def _env_bool(name: str, default: bool) -> bool:
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


class Settings(BaseModel):
    """Process-wide settings read from the environment."""

    cache_dir: str = Field(
        default="cache", description="Directory for the on-disk Gram cache"
    )
    training_mode: Literal["deterministic", "fast"] = Field(
        default="deterministic",
        description="'deterministic' forces single-threaded gradient reduction",
    )
    workers: int = Field(
        default=1, ge=1, description="Worker threads for studies and fast training"
    )
    verbose: bool = Field(default=True, description="Print progress lines")

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            cache_dir=os.environ.get("MFE_CACHE_DIR", "cache"),
            training_mode=os.environ.get("MFE_TRAINING_MODE", "deterministic"),
            workers=int(os.environ.get("MFE_WORKERS", "1")),
            verbose=_env_bool("MFE_VERBOSE", True),
        )


class NetworkConfig(BaseModel):
    """Shape of the MIONet used on encoded features."""

    hidden: List[int] = Field(
        default_factory=lambda: [64, 64],
        description="Hidden widths of every nonlinear branch and of the trunk",
    )
    latent: int = Field(default=64, ge=1, description="Latent width p")
    activation: Literal["tanh", "relu"] = "tanh"
    linear_source_branch: bool = Field(
        default=True,
        description="Model the source/boundary branch as a bias-free matrix",
    )


class OptimizerConfig(BaseModel):
    lr: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)
    decay_every: int = Field(
        default=0, ge=0, description="Step-decay period in iterations (0 = off)"
    )
    decay_rate: float = Field(default=0.5, gt=0, le=1)


class TrainConfig(BaseModel):
    iterations: int = Field(default=30000, ge=0)
    batch_size: int = Field(default=32, ge=1)
    log_interval: int = Field(default=1000, ge=1)
    mode: Literal["deterministic", "fast"] = "deterministic"


class Preset(BaseModel):
    network: NetworkConfig
    optimizer: OptimizerConfig
    train: TrainConfig


PRESETS = {
    "desk": Preset(
        network=NetworkConfig(hidden=[64, 64], latent=64, activation="tanh"),
        optimizer=OptimizerConfig(lr=1e-3, decay_every=10000, decay_rate=0.5),
        train=TrainConfig(iterations=30000, batch_size=32, log_interval=2000),
    ),
    "paper": Preset(
        network=NetworkConfig(hidden=[500, 500, 500], latent=500, activation="tanh"),
        optimizer=OptimizerConfig(lr=1e-5),
        train=TrainConfig(iterations=5_000_000, batch_size=5, log_interval=10000),
    ),
}


def get_preset(name: str) -> Preset:
    """Return a deep copy of a named preset."""
    if name not in PRESETS:
        raise ValueError(f"Unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return PRESETS[name].model_copy(deep=True)
