"""Expression front-end: parsing and exact derivatives via Taylor jets."""

from .jets import ZERO_TOL, BiJet2, EvaluationError, Jet3
from .parser import (
    BUILTIN_CONSTANTS,
    FUNCTIONS,
    Binary,
    Const,
    Expression,
    ExprError,
    ExprSyntaxError,
    Num,
    Unary,
    UnknownIdentifierError,
    Var,
    eval_bijet2,
    eval_jet3,
    evaluate,
    parse,
    to_text,
)

__all__ = [
    "ZERO_TOL",
    "BUILTIN_CONSTANTS",
    "FUNCTIONS",
    "BiJet2",
    "Binary",
    "Const",
    "EvaluationError",
    "Expression",
    "ExprError",
    "ExprSyntaxError",
    "Jet3",
    "Num",
    "Unary",
    "UnknownIdentifierError",
    "Var",
    "eval_bijet2",
    "eval_jet3",
    "evaluate",
    "parse",
    "to_text",
]
