"""Numerical defaults, overridable through SSIKIT_-prefixed environment variables.

Example: ``SSIKIT_DIM_CAP=16384 ssikit evaluate ...`` raises the total-dimension
cap for a single run.  Values are read at call time, so tests may also
monkeypatch the environment.
"""

import os

_DEFAULTS = {
    # total Hilbert-space dimension d**N allowed for dense storage
    "DIM_CAP": 4096,
    # relative Frobenius hermiticity tolerance
    "TOL_HERM": 1e-9,
    # absolute eigenvalue floor for positive semidefiniteness
    "TOL_PSD": 1e-9,
    # |trace - 1| allowed for density matrices
    "TOL_TRACE": 1e-10,
    # relative reconstruction error allowed for eigendecompositions
    "TOL_EIG": 1e-9,
    # a criterion counts as violated when margin < -TOL_VIOLATE
    "TOL_VIOLATE": 1e-7,
    # largest collective second moment accepted for a singlet construction
    "TOL_SINGLET": 1e-8,
    # mean-squared denominator below which a ratio criterion is inapplicable
    "TOL_DENOM": 1e-12,
    # permutation-invariance tolerance for symmetric-state criteria
    "TOL_SYMMETRIC": 1e-8,
    # optimizer defaults
    "RESTARTS": 64,
    "MAX_SWEEPS": 200,
    "TOL_IMPROVE": 1e-10,
}


def get(name):
    """Configured value of ``name``; an SSIKIT_<name> environment variable wins."""
    default = _DEFAULTS[name]
    raw = os.environ.get("SSIKIT_" + name)
    if raw is None:
        return default
    return type(default)(raw)
