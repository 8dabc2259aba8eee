"""Dataset loading with deterministic, disjoint train/validation splits.

Three sources:
  digits     scikit-learn's bundled 8x8 digit images, upscaled to the
             working resolution; fully offline (1797 images total, default
             split 1200 train / 597 validation).
  mnist      torchvision MNIST from --data-dir; downloads when the network
             allows, otherwise requires a pre-populated cache (default
             split 2000 train / 1000 validation, both from the train pool).
  synthetic  random tensors with random labels; protocol testing only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .settings import TrainerSettings

_DEFAULT_SIZES = {"digits": (1200, 597), "mnist": (2000, 1000), "synthetic": (256, 128)}


@dataclass
class DataBundle:
    x_train: torch.Tensor
    y_train: torch.Tensor
    x_val: torch.Tensor
    y_val: torch.Tensor

    def __post_init__(self):
        assert len(self.x_train) == len(self.y_train)
        assert len(self.x_val) == len(self.y_val)


def _resolve_sizes(settings: TrainerSettings) -> tuple[int, int]:
    d_train, d_val = _DEFAULT_SIZES[settings.dataset]
    return settings.train_size or d_train, settings.val_size or d_val


def _split(x: torch.Tensor, y: torch.Tensor, train_size: int, val_size: int, seed: int):
    if train_size + val_size > len(x):
        raise ValueError(
            f"requested {train_size}+{val_size} samples, dataset has {len(x)}"
        )
    order = np.random.RandomState(seed).permutation(len(x))
    train_idx = torch.from_numpy(order[:train_size].copy())
    val_idx = torch.from_numpy(order[train_size : train_size + val_size].copy())
    return DataBundle(x[train_idx], y[train_idx], x[val_idx], y[val_idx])


def _load_digits(settings: TrainerSettings) -> tuple[torch.Tensor, torch.Tensor]:
    from sklearn.datasets import load_digits

    raw = load_digits()
    x = torch.tensor(raw.images, dtype=torch.float32).unsqueeze(1) / 16.0
    if settings.image_size != x.shape[-1]:
        x = torch.nn.functional.interpolate(
            x, size=(settings.image_size, settings.image_size),
            mode="bilinear", align_corners=False,
        )
    x = (x - x.mean()) / x.std()
    return x, torch.tensor(raw.target, dtype=torch.long)


def _load_mnist(settings: TrainerSettings) -> tuple[torch.Tensor, torch.Tensor]:
    try:
        from torchvision import datasets
    except ImportError as exc:
        raise RuntimeError("mnist dataset requires torchvision") from exc
    root = settings.data_dir or "~/.cache/pytrainer"
    try:
        raw = datasets.MNIST(root, train=True, download=True)
    except Exception as exc:
        raise RuntimeError(
            f"cannot load MNIST from {root!r} (no cache and download failed): {exc}"
        ) from exc
    x = raw.data.unsqueeze(1).float() / 255.0
    if settings.image_size != x.shape[-1]:
        x = torch.nn.functional.interpolate(
            x, size=(settings.image_size, settings.image_size),
            mode="bilinear", align_corners=False,
        )
    x = (x - 0.1307) / 0.3081
    return x, raw.targets.long()


def _load_synthetic(settings: TrainerSettings) -> tuple[torch.Tensor, torch.Tensor]:
    generator = torch.Generator().manual_seed(settings.split_seed)
    total = sum(_resolve_sizes(settings))
    x = torch.randn(
        total, 1, settings.image_size, settings.image_size, generator=generator
    )
    y = torch.randint(0, settings.num_classes, (total,), generator=generator)
    return x, y


def load_dataset(settings: TrainerSettings) -> DataBundle:
    if settings.dataset == "digits":
        x, y = _load_digits(settings)
    elif settings.dataset == "mnist":
        x, y = _load_mnist(settings)
    else:
        x, y = _load_synthetic(settings)
    train_size, val_size = _resolve_sizes(settings)
    return _split(x, y, train_size, val_size, settings.split_seed)
