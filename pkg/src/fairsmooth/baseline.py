"""Global Lipschitz-constraint post-processing baseline.

Projects outputs onto the set { f : ||f_i - f_j||_2 <= L * d(x_i, x_j) for
all constrained pairs } in the Euclidean sense, via Dykstra's alternating
projections.  Plain cyclic projection would only find a feasible point;
Dykstra's correction terms make the limit the actual projection, matching
the argmin formulation.  This method is the scalability baseline: it is
quadratic in the number of pairs and is not meant for large n.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidParameter,
    NotConverged,
)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class LipschitzConstraint:
    """||f_i - f_j||_2 <= bound, with bound = L * d(x_i, x_j)."""

    i: int
    j: int
    bound: float

    def __post_init__(self):
        if not self.i < self.j:
            raise InvalidParameter(f"constraint requires i < j, got ({self.i}, {self.j})")
        if self.bound < 0:
            raise InvalidParameter(f"constraint bound must be >= 0, got {self.bound}")


def constraints_from_distances(
    pairs: Sequence[Tuple[int, int, float]], lipschitz: float
) -> List[LipschitzConstraint]:
    """Turn (i, j, fair distance) triples into constraints with bound L*d."""
    if not lipschitz > 0:
        raise InvalidParameter(f"lipschitz constant must be positive, got {lipschitz}")
    out = []
    for i, j, d in pairs:
        i, j = int(i), int(j)
        if i > j:
            i, j = j, i
        out.append(LipschitzConstraint(i=i, j=j, bound=lipschitz * float(d)))
    return out


def project_pair(f_i: np.ndarray, f_j: np.ndarray, bound: float):
    """Euclidean projection of (f_i, f_j) onto ||f_i - f_j|| <= bound.

    If violated, both points move toward each other along their difference
    by equal amounts until the distance equals the bound.
    """
    f_i = np.atleast_1d(np.asarray(f_i, dtype=float))
    f_j = np.atleast_1d(np.asarray(f_j, dtype=float))
    diff = f_i - f_j
    dist = float(np.linalg.norm(diff))
    if dist <= bound:
        return f_i.copy(), f_j.copy()
    if dist == 0.0:
        return f_i.copy(), f_j.copy()
    shift = 0.5 * (dist - bound) / dist
    return f_i - shift * diff, f_j + shift * diff


def global_if_project(
    yhat: np.ndarray,
    constraints: Sequence[LipschitzConstraint],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """Dykstra's projection of yhat onto the intersection of all constraints.

    Sweeps the constraints in fixed lexicographic order, carrying one
    correction per constraint.  Terminates when every constraint holds
    within tol and the iterate moved less than tol over a full sweep.
    """
    y = np.asarray(yhat, dtype=float)
    squeeze = y.ndim == 1
    f = y[:, None].copy() if squeeze else y.copy()
    n, K = f.shape
    cons = sorted(constraints, key=lambda c: (c.i, c.j))
    for c in cons:
        if not (0 <= c.i < n and 0 <= c.j < n):
            raise IndexOutOfRange(f"constraint ({c.i}, {c.j}) out of range for n={n}")
    if not cons:
        return f[:, 0] if squeeze else f

    corrections = np.zeros((len(cons), 2, K))
    for _ in range(max_iter):
        moved = 0.0
        for idx, c in enumerate(cons):
            zi = f[c.i] + corrections[idx, 0]
            zj = f[c.j] + corrections[idx, 1]
            pi, pj = project_pair(zi, zj, c.bound)
            corrections[idx, 0] = zi - pi
            corrections[idx, 1] = zj - pj
            moved = max(
                moved,
                float(np.max(np.abs(pi - f[c.i]))),
                float(np.max(np.abs(pj - f[c.j]))),
            )
            f[c.i] = pi
            f[c.j] = pj
        worst = _worst_violation(f, cons)
        if worst <= tol and moved < tol:
            return f[:, 0] if squeeze else f
    raise NotConverged(
        f"Dykstra did not converge in {max_iter} sweeps; worst violation {_worst_violation(f, cons):.3e}"
    )


def _worst_violation(f: np.ndarray, cons: Sequence[LipschitzConstraint]) -> float:
    worst = 0.0
    for c in cons:
        excess = float(np.linalg.norm(f[c.i] - f[c.j])) - c.bound
        if excess > worst:
            worst = excess
    return worst


def count_violations(
    f: np.ndarray,
    constraints: Sequence[LipschitzConstraint],
    slack: float = 0.0,
) -> List[Tuple[int, int, float]]:
    """Pairs violating their bound by more than ``slack``, with the excess."""
    arr = np.asarray(f, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    out = []
    for c in constraints:
        excess = float(np.linalg.norm(arr[c.i] - arr[c.j])) - c.bound
        if excess > slack:
            out.append((c.i, c.j, excess))
    return out
