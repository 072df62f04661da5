"""Persistent Laplacians, Hodge theory and stability checks for filtered DGI spaces."""
from .kernels import BACKEND
from .linalg import NumericPolicy, get_policy, policy_context
from .dgi import DgiMorphism, DgiSpace
from .perslap import PersistenceDgi

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DgiMorphism",
    "DgiSpace",
    "NumericPolicy",
    "PersistenceDgi",
    "get_policy",
    "policy_context",
]
