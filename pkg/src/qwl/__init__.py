"""Completely positive maps, conditional positivity and q-weight certificates."""

from .numerics import TolerancePolicy, policy_from_env
from .superop import SuperOperator, is_completely_positive, kraus
from .condform import canonical_form, classify, cp_criterion
from .bweight import DIVERGENT, Atom, Observable, WeightFamily, gram
from .qweight import QWeightSpec, assemble, certify_q_pure

__version__ = "0.1.0"

__all__ = [
    "TolerancePolicy", "policy_from_env", "SuperOperator", "is_completely_positive", "kraus",
    "canonical_form", "classify", "cp_criterion", "DIVERGENT", "Atom", "Observable",
    "WeightFamily", "gram", "QWeightSpec", "assemble", "certify_q_pure",
]
