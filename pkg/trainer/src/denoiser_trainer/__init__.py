"""Training side of the CSI feedback toolkit.

Reads CSID1 channel datasets, trains the noise-level-conditioned denoising
CNN on clean/noisy pairs, folds batch normalization into the convolutions,
and exports PPPW1 weight files for the reconstruction package.
"""
__version__ = "0.1.0"
