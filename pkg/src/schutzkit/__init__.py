"""Schützenberger products of finite monoids in Set, Pos, JSL and Vect over GF(p),
with bounded machine checks of their recognition theorems."""

from .core import (JSL, POS, SET, EnumerationTooLarge, FiniteObject, InputError, Kind, OutputSemiring,
                   SchutzError, SizeGuardError, SValuation, VarietyTag, enumerate_valuations, is_separating,
                   validate_object, vect)
from .dmonoid import (DMonoid, LetterAssignment, MonoidMorphism, eval_word, image_of_free_morphism,
                      is_monoid_morphism, validate_dmonoid)
from .languages import TruncLanguage, c_op_apply, closure_membership, derivative, marked_product
from .products import (jsl_closed_semiring, kp_closure, lift_algebra, schutzenberger, star_product,
                       tensor_jsl_oracle, triangular_monoid)
from .recognition import (VerificationReport, closure_check, decompose_middle, lmn_set, recognizes,
                          reutenauer_check, schurec_witness, universal_property_check)

__version__ = "0.1.0"

__all__ = [
    "JSL",
    "POS",
    "SET",
    "EnumerationTooLarge",
    "FiniteObject",
    "InputError",
    "Kind",
    "OutputSemiring",
    "SchutzError",
    "SizeGuardError",
    "SValuation",
    "VarietyTag",
    "enumerate_valuations",
    "is_separating",
    "validate_object",
    "vect",
    "DMonoid",
    "LetterAssignment",
    "MonoidMorphism",
    "eval_word",
    "image_of_free_morphism",
    "is_monoid_morphism",
    "validate_dmonoid",
    "TruncLanguage",
    "c_op_apply",
    "closure_membership",
    "derivative",
    "marked_product",
    "jsl_closed_semiring",
    "kp_closure",
    "lift_algebra",
    "schutzenberger",
    "star_product",
    "tensor_jsl_oracle",
    "triangular_monoid",
    "VerificationReport",
    "closure_check",
    "decompose_middle",
    "lmn_set",
    "recognizes",
    "reutenauer_check",
    "schurec_witness",
    "universal_property_check",
]
