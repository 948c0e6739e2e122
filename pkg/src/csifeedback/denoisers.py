"""Pluggable denoisers for the reconstruction loop.

Classical soft-thresholding, an identity passthrough, and a CNN forward pass
(pixel unshuffle -> constant noise-level map -> 3x3 conv stack -> pixel
shuffle) loaded from a PPPW1 weights file.  A denoiser is a callable
(vector, sigma) -> vector operating in the normalized CSI domain.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ShapeError,
    WeightsChannelError,
    WeightsMagicError,
    WeightsTruncatedError,
    WeightsValueError,
)
from .linalg import pixel_shuffle, pixel_unshuffle

DenoiserFn = Callable[[np.ndarray, float], np.ndarray]

_ACTIVATIONS = ("relu", "tanh", "linear")


@dataclass(frozen=True)
class ConvLayer:
    weights: np.ndarray  # (out_ch, in_ch, k, k)
    bias: np.ndarray  # (out_ch,)
    activation: str


@dataclass(frozen=True)
class DenoiserModel:
    """Inference graph for the CNN denoiser (batch norm already folded)."""

    layers: tuple[ConvLayer, ...]

    def __post_init__(self):
        if not self.layers:
            raise WeightsChannelError("model has no layers")
        prev_out = self.layers[0].weights.shape[1]
        for i, layer in enumerate(self.layers):
            out_ch, in_ch, kh, kw = layer.weights.shape
            if in_ch != prev_out:
                raise WeightsChannelError(
                    f"layer {i}: in_ch {in_ch} does not match previous out_ch {prev_out}"
                )
            if layer.bias.shape != (out_ch,):
                raise WeightsChannelError(f"layer {i}: bias shape {layer.bias.shape}")
            if layer.activation not in _ACTIVATIONS:
                raise WeightsChannelError(f"layer {i}: activation {layer.activation!r}")
            if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
                raise WeightsValueError(f"layer {i}: non-finite parameters")
            prev_out = out_ch

    @property
    def input_channels(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_channels(self) -> int:
        return self.layers[-1].weights.shape[0]

    @property
    def parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)


def denoise_soft_threshold(z: np.ndarray, sigma: float, gain: float = 1.0) -> np.ndarray:
    """Elementwise soft-thresholding at tau = gain * sigma (prox of the l1 norm)."""
    tau = gain * sigma
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def _activate(x: np.ndarray, name: str) -> np.ndarray:
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "tanh":
        return np.tanh(x)
    return x


def conv2d_same(inp: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """3x3 cross-correlation, zero padding 1, stride 1, bias + activation."""
    inp = np.asarray(inp, dtype=float)
    d0, d1, in_ch = inp.shape
    out_ch, w_in, kh, kw = layer.weights.shape
    if in_ch != w_in:
        raise ShapeError(f"input has {in_ch} channels, layer expects {w_in}")
    pad = kh // 2
    padded = np.pad(inp, ((pad, pad), (pad, pad), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kh, kw), axis=(0, 1))
    # windows: (d0, d1, in_ch, kh, kw); weights: (out_ch, in_ch, kh, kw)
    out = np.einsum("ijckl,ockl->ijo", windows, layer.weights) + layer.bias
    return _activate(out, layer.activation)


def denoise_cnn(model: DenoiserModel, z_tensor: np.ndarray, sigma: float) -> np.ndarray:
    """CNN denoiser forward pass on a (Nd, Nt, 2) tensor.

    Pixel-unshuffles to four sub-tensors, appends a constant sigma map as the
    ninth channel, runs the conv stack, and pixel-shuffles back.  The last
    layer's tanh keeps the output inside [-1, 1].
    """
    z_tensor = np.asarray(z_tensor, dtype=float)
    sub = pixel_unshuffle(z_tensor)
    noise_map = np.full((*sub.shape[:2], 1), sigma)
    x = np.concatenate([sub, noise_map], axis=2)
    if x.shape[2] != model.input_channels:
        raise ShapeError(
            f"model expects {model.input_channels} input channels, pipeline built {x.shape[2]}"
        )
    for layer in model.layers:
        x = conv2d_same(x, layer)
    return pixel_shuffle(x)


# ---------------------------------------------------------------------------
# PPPW1 serialization: magic "PPPW1", u32 layer_count; per layer u32 in_ch,
# u32 out_ch, u32 kernel, u8 activation (0=relu 1=tanh 2=linear), f32 weights
# in [out][in][k][k] order, f32 bias[out].  Little-endian, no padding.
# ---------------------------------------------------------------------------

_MAGIC = b"PPPW1"


def save_weights(model: DenoiserModel, path) -> None:
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", len(model.layers)))
        for layer in model.layers:
            out_ch, in_ch, k, _ = layer.weights.shape
            f.write(struct.pack("<IIIB", in_ch, out_ch, k, _ACTIVATIONS.index(layer.activation)))
            f.write(np.ascontiguousarray(layer.weights, dtype="<f4").tobytes())
            f.write(np.ascontiguousarray(layer.bias, dtype="<f4").tobytes())


def load_weights(path) -> DenoiserModel:
    with open(path, "rb") as f:
        raw = f.read()

    def take(n: int, what: str) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise WeightsTruncatedError(f"file ends inside {what} (need {n} bytes at {off})")
        chunk = raw[off : off + n]
        off += n
        return chunk

    off = 0
    if take(5, "magic") != _MAGIC:
        raise WeightsMagicError(f"bad magic in {path}")
    (layer_count,) = struct.unpack("<I", take(4, "layer count"))
    layers = []
    for i in range(layer_count):
        in_ch, out_ch, k, act = struct.unpack("<IIIB", take(13, f"layer {i} header"))
        if act >= len(_ACTIVATIONS):
            raise WeightsChannelError(f"layer {i}: unknown activation code {act}")
        w = np.frombuffer(take(4 * out_ch * in_ch * k * k, f"layer {i} weights"), dtype="<f4")
        b = np.frombuffer(take(4 * out_ch, f"layer {i} bias"), dtype="<f4")
        layers.append(
            ConvLayer(
                weights=w.astype(float).reshape(out_ch, in_ch, k, k),
                bias=b.astype(float),
                activation=_ACTIVATIONS[act],
            )
        )
    return DenoiserModel(layers=tuple(layers))


# ---------------------------------------------------------------------------
# Registry: names used in configs and manifests.
# ---------------------------------------------------------------------------


def make_denoiser(
    name: str,
    shape: tuple[int, int],
    gain: float = 1.0,
    weights_path=None,
) -> DenoiserFn:
    """Build a (vector, sigma) -> vector denoiser for (Nd, Nt) channels.

    The vector layout is [real block | imaginary block] row-major, matching
    transform.vectorize.
    """
    nd, nt = shape
    half = nd * nt

    if name == "identity":
        return lambda z, sigma: z
    if name == "soft_threshold":
        return lambda z, sigma: denoise_soft_threshold(z, sigma, gain=gain)
    if name == "cnn":
        model = weights_path if isinstance(weights_path, DenoiserModel) else load_weights(weights_path)

        def run(z: np.ndarray, sigma: float) -> np.ndarray:
            tensor = np.stack([z[:half].reshape(nd, nt), z[half:].reshape(nd, nt)], axis=2)
            out = denoise_cnn(model, tensor, sigma)
            return np.concatenate([out[:, :, 0].ravel(), out[:, :, 1].ravel()])

        return run
    raise ValueError(f"unknown denoiser {name!r}")
