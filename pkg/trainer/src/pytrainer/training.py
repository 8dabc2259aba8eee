"""Train one genome network and score it on the validation split.

Cross-entropy loss, Adam with per-epoch exponential learning-rate decay,
shuffled mini-batches. The torch seed is derived from the process base
seed plus the genome document, so repeating a request yields the same
fitness within and across serving processes.
"""

from __future__ import annotations

import hashlib
import json

import torch
from torch import nn

from .data import DataBundle
from .model import build_network
from .settings import TrainerSettings


def derive_seed(base_seed: int, genome_doc) -> int:
    canonical = json.dumps(genome_doc, separators=(",", ":"), sort_keys=True)
    digest = hashlib.sha256(f"{base_seed}:{canonical}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def train_and_eval(
    genome_doc, epochs: int, settings: TrainerSettings, data: DataBundle
) -> float:
    """Returns validation accuracy in [0, 1]."""
    device = torch.device(settings.device)
    seed = derive_seed(settings.seed, genome_doc)
    torch.manual_seed(seed)

    model = build_network(genome_doc, settings, in_channels=data.x_train.shape[1])
    model.to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=settings.lr)
    scheduler = torch.optim.lr_scheduler.ExponentialLR(optimizer, gamma=settings.lr_decay)
    loss_fn = nn.CrossEntropyLoss()

    x_train = data.x_train.to(device)
    y_train = data.y_train.to(device)
    shuffler = torch.Generator().manual_seed(seed)

    model.train()
    for _ in range(epochs):
        order = torch.randperm(len(x_train), generator=shuffler)
        for start in range(0, len(order), settings.batch_size):
            idx = order[start : start + settings.batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x_train[idx]), y_train[idx])
            loss.backward()
            optimizer.step()
        scheduler.step()

    model.eval()
    correct = 0
    with torch.no_grad():
        x_val = data.x_val.to(device)
        y_val = data.y_val.to(device)
        for start in range(0, len(x_val), settings.batch_size):
            logits = model(x_val[start : start + settings.batch_size])
            correct += int(
                (logits.argmax(dim=1) == y_val[start : start + settings.batch_size]).sum()
            )
    return correct / len(x_val)
