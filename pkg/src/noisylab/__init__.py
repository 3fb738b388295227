"""Transductive training on noisy pseudo-labels.

Feature vectors go in with an initial row-stochastic label matrix; a small
MLP classifier is trained from scratch with a KL fitting loss on
temperature-rescaled labels plus a class-conditional contrastive
regularizer, while the labels themselves are refined between epochs by
ensemble averaging of per-epoch predictions.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
