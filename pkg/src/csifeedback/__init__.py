"""One-sided massive-MIMO CSI feedback toolkit.

UE side: seeded row-orthonormal linear projection plus mu-law quantization.
BS side: plug-and-play reconstruction via half-quadratic splitting with a
pluggable denoiser (soft-threshold or a CNN loaded from a PPPW1 file).
"""

__version__ = "0.1.0"
