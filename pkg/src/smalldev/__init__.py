"""Small-deviation bounds for weighted sums of independent unit-mean variables."""

from smalldev._backend import BACKEND
from smalldev.model import (
    FLOAT,
    RATIONAL,
    DeltaThreshold,
    DiscreteVar,
    Instance,
    ModelError,
    WeightVector,
    make_delta,
    make_discrete_var,
    make_weight_vector,
    validate_instance,
)

__version__ = "0.1.0"
