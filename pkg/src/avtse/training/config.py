"""Training hyperparameters."""

from __future__ import annotations

from dataclasses import dataclass, asdict

from ..errors import ConfigurationError

STRATEGIES = ("ST", "MTT", "MDT")


@dataclass
class TrainConfig:
    """Optimization protocol settings.

    ``batch_size=None`` resolves to the strategy default: 7 for multi-task
    training (three forward passes per example), 20 otherwise.
    """

    strategy: str = "MDT"
    lr: float = 5e-4
    weight_decay: float = 1e-5
    batch_size: int | None = None
    grad_clip_norm: float = 5.0
    max_epochs: int = 300
    plateau_patience: int = 5
    plateau_factor: float = 0.5
    early_stop_patience: int = 40
    seed: int = 0
    dynamic_mixing: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        for name in (
            "lr",
            "weight_decay",
            "grad_clip_norm",
            "max_epochs",
            "plateau_patience",
            "plateau_factor",
            "early_stop_patience",
        ):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ConfigurationError("batch_size must be positive")

    @property
    def effective_batch_size(self) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 7 if self.strategy == "MTT" else 20

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**data)
