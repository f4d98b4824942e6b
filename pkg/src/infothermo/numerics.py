"""Central numerical policy: every tolerance the library and its tests share."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericalPolicy:
    """Tolerances used across the toolkit.

    Attributes
    ----------
    validation:
        Structural validation of operators (hermiticity, trace, eigenvalue
        floor), max absolute deviation.
    identity:
        Analytic identity checks (entropy balance, dual-formula agreement).
    povm:
        Completeness of effect sets (sum to identity) and probability sums.
    support:
        Eigenvalues within this of zero are treated as exactly zero when
        computing supports.
    eig_clamp:
        Eigenvalues below this are treated as 0 inside matrix functions,
        realizing the 0*log(0) = 0 convention.
    bound:
        Slack below which a thermodynamic bound counts as violated.
    suite_margin:
        Pass bar for randomized bound suites (looser than `bound` to absorb
        erasure residuals).
    """

    validation: float = 1e-10
    identity: float = 1e-8
    povm: float = 1e-9
    support: float = 1e-12
    eig_clamp: float = 1e-14
    bound: float = 1e-8
    suite_margin: float = 1e-6


POLICY = NumericalPolicy()
