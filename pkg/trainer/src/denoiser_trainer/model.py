"""The noise-level-conditioned denoising CNN and its batch-norm folding.

Architecture: pixel-unshuffle the (2, H, W) CSI tensor by 2, append a
constant noise-level map as the ninth channel, run a stack of 3x3 zero-padded
convolutions (Conv+ReLU first, Conv+BN+ReLU in the middle, Conv+Tanh last),
and pixel-shuffle back.  The tanh keeps outputs in [-1, 1], matching the
normalized CSI range.
"""
from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from .formats import ExportLayer


class DenoiserNet(nn.Module):
    def __init__(self, num_layers: int = 8, features: int = 48):
        super().__init__()
        if num_layers < 3:
            raise ValueError("need at least first/middle/last layers")
        self.first = nn.Conv2d(9, features, 3, padding=1)
        self.middle = nn.ModuleList(
            nn.Conv2d(features, features, 3, padding=1) for _ in range(num_layers - 2)
        )
        self.norms = nn.ModuleList(nn.BatchNorm2d(features) for _ in range(num_layers - 2))
        self.last = nn.Conv2d(features, 8, 3, padding=1)

    def forward(self, z: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
        """z: (B, 2, H, W) with even H, W; sigma: (B,) noise levels."""
        x = F.pixel_unshuffle(z, 2)
        noise_map = sigma.view(-1, 1, 1, 1).expand(-1, 1, *x.shape[2:])
        x = torch.cat([x, noise_map], dim=1)
        x = F.relu(self.first(x))
        for conv, bn in zip(self.middle, self.norms):
            x = F.relu(bn(conv(x)))
        x = torch.tanh(self.last(x))
        return F.pixel_shuffle(x, 2)


def _folded(conv: nn.Conv2d, bn: nn.BatchNorm2d | None) -> tuple[torch.Tensor, torch.Tensor]:
    w = conv.weight.detach()
    b = conv.bias.detach()
    if bn is None:
        return w, b
    if bn.running_mean is None or bn.running_var is None:
        raise ValueError("batch norm has no running statistics to fold")
    scale = bn.weight.detach() / torch.sqrt(bn.running_var + bn.eps)
    return w * scale.view(-1, 1, 1, 1), bn.bias.detach() + (b - bn.running_mean) * scale


def fold_batchnorm(model: DenoiserNet) -> list[ExportLayer]:
    """Absorb each BN into its preceding convolution; returns inference layers."""
    model.eval()
    layers = [ExportLayer(*(t.numpy().astype(float) for t in _folded(model.first, None)), "relu")]
    for conv, bn in zip(model.middle, model.norms):
        w, b = _folded(conv, bn)
        layers.append(ExportLayer(w.numpy().astype(float), b.numpy().astype(float), "relu"))
    w, b = _folded(model.last, None)
    layers.append(ExportLayer(w.numpy().astype(float), b.numpy().astype(float), "tanh"))
    return layers


def forward_folded(layers: list[ExportLayer], z: torch.Tensor, sigma: torch.Tensor) -> torch.Tensor:
    """Run exported layers directly (the dual path used to verify folding)."""
    x = F.pixel_unshuffle(z, 2)
    noise_map = sigma.view(-1, 1, 1, 1).expand(-1, 1, *x.shape[2:])
    x = torch.cat([x, noise_map], dim=1)
    for layer in layers:
        w = torch.as_tensor(layer.weights, dtype=x.dtype)
        b = torch.as_tensor(layer.bias, dtype=x.dtype)
        x = F.conv2d(x, w, b, padding=w.shape[-1] // 2)
        if layer.activation == "relu":
            x = F.relu(x)
        elif layer.activation == "tanh":
            x = torch.tanh(x)
    return F.pixel_shuffle(x, 2)
