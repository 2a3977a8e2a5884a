"""Closed-form exponential of the 2x2 heat-exchange coupling matrix.

Along a characteristic x - t = const both transport terms drop out and the
temperature pair obeys dv/ds = A1 v with

    A1 = [[-h1,  h1],
          [ h2, -h2]].

A1 has eigenvalues 0 and -(h1 + h2), so with E = exp(-(h1 + h2) s)

    exp(A1 s) = 1/(h1+h2) * [[h2 + h1 E,  h1 (1 - E)],
                             [h2 (1 - E), h1 + h2 E]].

The matrix is row stochastic for s >= 0: each row sums to one and all
entries lie in [0, 1], so applying it is a convex mixing of the two
temperatures.  The weighted sum h2*v1 + h1*v2 is conserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import Params


def coupling_matrix(s: float, h1: float, h2: float) -> np.ndarray:
    """Return exp(A1 s) as a 2x2 array.  Requires s >= 0 and h1, h2 >= 0."""
    if not s >= 0.0:
        raise ValueError(f"elapsed characteristic time must be nonnegative, got {s}")
    rate = h1 + h2
    if rate == 0.0:
        return np.eye(2)
    decay = math.exp(-rate * s)
    return np.array(
        [
            [(h2 + h1 * decay) / rate, h1 * (1.0 - decay) / rate],
            [h2 * (1.0 - decay) / rate, (h1 + h2 * decay) / rate],
        ]
    )


@dataclass(frozen=True)
class CouplingExp:
    """exp(A1 s) together with the elapsed time it was evaluated at."""

    s: float
    entries: np.ndarray

    def __matmul__(self, other):
        return self.entries @ other


def coupling_exp(s: float, params: Params) -> CouplingExp:
    """Evaluate the coupling semigroup at elapsed characteristic time s."""
    return CouplingExp(s=s, entries=coupling_matrix(s, params.h1, params.h2))
