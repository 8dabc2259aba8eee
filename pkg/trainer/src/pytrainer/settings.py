"""Trainer configuration: dataset, architecture and optimization knobs.

Defaults are tuned for desk-scale runs (a few optimizer steps, CPU): a
higher learning rate and faster batch-norm statistics than the full-scale
recipe, which stays reachable via flags (--lr 1e-4 with a real epoch
budget and --bn-momentum 0.1).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class TrainerSettings:
    # dataset
    dataset: str = "digits"  # digits | mnist | synthetic
    data_dir: str | None = None
    train_size: int | None = None  # dataset-dependent default, see data.py
    val_size: int | None = None
    split_seed: int = 42
    image_size: int = 28

    # architecture (mirrors the engine's channel convention)
    num_normal: int = 3
    num_reductions: int = 2
    filters: int = 24
    channel_multiplier: int = 2
    num_classes: int = 10
    dropout: float = 0.2
    bn_momentum: float = 0.5  # short runs need fast-moving running stats

    # optimization
    batch_size: int = 64
    lr: float = 3e-3
    lr_decay: float = 0.9  # ExponentialLR gamma, applied per epoch
    seed: int = 0
    device: str = "cpu"

    # protocol
    epochs_cap: int | None = None

    def validate(self) -> None:
        if self.dataset not in ("digits", "mnist", "synthetic"):
            raise ValueError(f"unknown dataset {self.dataset!r}")
        if self.batch_size < 1 or self.filters < 1 or self.num_normal < 1:
            raise ValueError("batch_size, filters and num_normal must be >= 1")
        if self.num_reductions < 0:
            raise ValueError("num_reductions must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout={self.dropout} outside [0, 1)")
        if self.epochs_cap is not None and self.epochs_cap < 1:
            raise ValueError("epochs_cap must be >= 1 when set")
