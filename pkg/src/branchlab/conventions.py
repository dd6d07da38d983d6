"""Branch-cut, sheet and sign conventions shared by every module.

The ledger file ``data/convention_ledger.json`` is the single source of
truth for phase conventions and for the handful of constants that are
calibrated empirically (overall sign of the line-model operator, the
constant relating the finite-part formula to the strip convention).
Code reads the values from here; manifests record the ledger hash.
"""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from importlib import resources

# Overall sign of the line-model operator on decaying harmonic extensions
# (eigenvalue -|xi| on mode xi); calibrated against the strip solver.
DTN_SIGN = -1.0

# Constant relating the finite-part formula (prefactor pi, counterterm
# 2*kappa3/delta) and the boundary-pairing quadrature (prefactor pi) to the
# strip/multiplier convention.  Measured once by the cross-validation.
FINITE_PART_OVER_MULTIPLIER = 3.141592653589793
EQ37_OVER_STRIP = 3.141592653589793


@lru_cache(maxsize=1)
def ledger_text() -> str:
    return resources.files("branchlab").joinpath("data/convention_ledger.json").read_text()


@lru_cache(maxsize=1)
def ledger() -> dict:
    return json.loads(ledger_text())


def ledger_hash() -> str:
    """sha256 of the ledger file, recorded in every run manifest."""
    return hashlib.sha256(ledger_text().encode()).hexdigest()


def ledger_entry(name: str) -> dict:
    return ledger()["entries"][name]
