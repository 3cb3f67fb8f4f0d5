"""Numerical thresholds shared by all modules.

Exact conditions of the underlying theory ("full rank", "supp ρ ⊆ supp σ",
"equality holds") are replaced by thresholds. They are collected here so that
callers (and the command line) can tighten or relax them in one place.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Thresholds used when deciding numerical questions.

    Args:
        support:
            Relative eigenvalue threshold (times the largest eigenvalue) below
            which a direction is considered outside the support of an operator.
        psd_clamp:
            Negative eigenvalues of a state down to ``-psd_clamp`` are clamped
            to zero; anything below is rejected.
        trace:
            Allowed deviation of a state's trace from one.
        hermitian:
            Relative hermiticity tolerance for :class:`HermitianOperator`.
        completeness:
            Allowed ``max|Σ V†V - I|`` for a Kraus set.
        choi_eig:
            Choi eigenvalues above this value produce a minimal Kraus operator.
        numerical_rank:
            Singular values above this value count towards the numerical rank.
        reversible:
            Maximal trace-norm recovery residual for a "reversible" verdict.
        gap:
            Holevo gap (bits) below which monotonicity counts as saturated.
        construction_pass:
            Residual of ``A_i = Ψ*(B_i)`` accepted without warning.
        construction_fail:
            Residual of ``A_i = Ψ*(B_i)`` above which the construction fails.
        equivalence:
            Choi distance accepted when verifying an isometric equivalence.
        eb_equality:
            Allowed ``|C̄(Φ,ρ) - I(Φ,ρ)|`` for the entanglement-breaking test.
        file_completeness:
            Completeness residual tolerated (and repaired) in input files.
    """

    support: float = 1e-10
    psd_clamp: float = 1e-10
    trace: float = 1e-10
    hermitian: float = 1e-12
    completeness: float = 1e-9
    choi_eig: float = 1e-10
    numerical_rank: float = 1e-8
    reversible: float = 1e-7
    gap: float = 1e-7
    construction_pass: float = 1e-7
    construction_fail: float = 1e-5
    equivalence: float = 1e-8
    eb_equality: float = 1e-6
    file_completeness: float = 1e-6

    def __post_init__(self) -> None:
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if not value > 0:
                raise ValueError(
                    f"Tolerance '{field.name}' must be positive, got {value!r}"
                )

    def replace(self, **changes: float) -> Tolerances:
        """Return a copy with some thresholds overridden."""
        return dataclasses.replace(self, **changes)


DEFAULT_TOLERANCES = Tolerances()
