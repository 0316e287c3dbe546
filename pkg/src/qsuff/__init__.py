"""Finite-dimensional checks of relative entropy monotonicity and its equality case."""

from .divergences import alpha_divergence, rel_entropy, von_neumann_entropy
from .matcore import SuperOperator, partial_trace, tensor
from .states import QuantumChannel, channel_validate, random_channel, random_density

__version__ = "0.1.0"

__all__ = [
    "QuantumChannel",
    "SuperOperator",
    "alpha_divergence",
    "channel_validate",
    "partial_trace",
    "random_channel",
    "random_density",
    "rel_entropy",
    "tensor",
    "von_neumann_entropy",
]
