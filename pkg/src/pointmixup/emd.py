"""Earth Mover's Distance between equal-size point clouds.

The EMD here is the optimal *bijective* matching under the plain Euclidean
cost ``||x_i - y_j||_2`` (not squared), averaged over the ``N`` points::

    d(a, b) = min_perm (1/N) * sum_i ||a_i - b_perm[i]||

Three solvers are provided:

* :func:`emd_exact` -- min-cost bipartite matching (scipy's
  ``linear_sum_assignment``), globally optimal.
* :func:`emd_approx` -- forward auction with epsilon scaling; cheaper for
  large ``N`` and carries a certified optimality gap.
* :func:`emd_bruteforce` -- enumerates all ``N!`` bijections; an independent
  oracle for tiny ``N``.

:func:`emd` dispatches between the first two by size.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .cloud import _points
from .errors import CapacityError, InvalidArgumentError, SolverError

EXACT_CAP = 512
BRUTEFORCE_CAP = 8
DEFAULT_EPSILON = 1e-3


@dataclass(frozen=True, eq=False)
class Assignment:
    """Bijection on point indices: point ``i`` of the first cloud goes to ``perm[i]``."""

    perm: np.ndarray

    def __post_init__(self):
        p = np.array(self.perm, dtype=np.int64, copy=True).ravel()
        n = p.size
        if n == 0 or p.min() < 0 or p.max() >= n or np.unique(p).size != n:
            raise InvalidArgumentError("assignment is not a bijection on {0..N-1}")
        p.setflags(write=False)
        object.__setattr__(self, "perm", p)

    @classmethod
    def identity(cls, n: int) -> "Assignment":
        return cls(np.arange(n))

    @property
    def n(self) -> int:
        return self.perm.size

    def inverse(self) -> "Assignment":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.n)
        return Assignment(inv)

    def mean_cost(self, a, b) -> float:
        """Mean displacement ``(1/N) sum_i ||a_i - b_perm[i]||`` under this matching."""
        return matched_distance(_points(a), _points(b), self.perm)


@dataclass(frozen=True, eq=False)
class EmdResult:
    assignment: Assignment
    distance: float
    exact: bool
    gap_bound: float | None = None
    solver: str = ""

    @property
    def perm(self) -> np.ndarray:
        return self.assignment.perm


def matched_distance(x: np.ndarray, y: np.ndarray, perm) -> float:
    return float(np.linalg.norm(x - y[perm], axis=1).mean())


def cost_matrix(a, b) -> np.ndarray:
    """Pairwise Euclidean distances (N x N)."""
    return cdist(_points(a), _points(b))


def _pair(a, b):
    x, y = _points(a), _points(b)
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(
            f"EMD needs equal cardinalities, got {x.shape[0]} and {y.shape[0]}"
        )
    return x, y


def _result(x, y, perm, exact, solver, gap_bound=None) -> EmdResult:
    assignment = Assignment(perm)
    return EmdResult(assignment, matched_distance(x, y, assignment.perm), exact, gap_bound, solver)


# --------------------------------------------------------------------------
# exact


def emd_exact(a, b, cap: int = EXACT_CAP) -> EmdResult:
    x, y = _pair(a, b)
    n = x.shape[0]
    if n > cap:
        raise CapacityError(
            f"N={n} exceeds the exact-solver cap of {cap}; use emd_approx or raise the cap"
        )
    rows, cols = linear_sum_assignment(cdist(x, y))
    perm = np.empty(n, dtype=np.int64)
    perm[rows] = cols
    return _result(x, y, perm, True, "exact", 0.0)


def emd_bruteforce(a, b) -> EmdResult:
    x, y = _pair(a, b)
    n = x.shape[0]
    if n > BRUTEFORCE_CAP:
        raise CapacityError(f"brute force enumerates N! matchings; N={n} > {BRUTEFORCE_CAP}")
    cost = cdist(x, y)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    totals = cost[np.arange(n), perms].sum(axis=1)
    return _result(x, y, perms[np.argmin(totals)], True, "bruteforce", 0.0)


# --------------------------------------------------------------------------
# auction


@njit(cache=True)
def _auction_phase(benefit, prices, owner, assigned, eps, budget):
    """Gauss-Seidel forward auction until every bidder holds an item.

    Returns the number of bids placed, or -1 if ``budget`` ran out.
    """
    n = benefit.shape[0]
    queue = np.empty(n, dtype=np.int64)
    head = 0
    size = 0
    for i in range(n):
        if assigned[i] < 0:
            queue[(head + size) % n] = i
            size += 1
    bids = 0
    while size > 0:
        if bids >= budget:
            return -1
        i = queue[head]
        head = (head + 1) % n
        size -= 1
        best = -np.inf
        second = -np.inf
        jbest = -1
        for j in range(n):
            v = benefit[i, j] - prices[j]
            if v > best:
                second = best
                best = v
                jbest = j
            elif v > second:
                second = v
        if second == -np.inf:
            second = best
        prices[jbest] += best - second + eps
        prev = owner[jbest]
        owner[jbest] = i
        assigned[i] = jbest
        if prev >= 0:
            assigned[prev] = -1
            queue[(head + size) % n] = prev
            size += 1
        bids += 1
    return bids


@njit(cache=True)
def _dual_gap(benefit, prices, assigned):
    n = benefit.shape[0]
    dual = 0.0
    primal = 0.0
    for i in range(n):
        best = -np.inf
        for j in range(n):
            v = benefit[i, j] - prices[j]
            if v > best:
                best = v
        dual += best
        primal += benefit[i, assigned[i]]
    for j in range(n):
        dual += prices[j]
    return dual - primal


def _complete(assigned: np.ndarray) -> np.ndarray:
    """Fill unassigned bidders with free items, in index order."""
    perm = assigned.copy()
    taken = np.zeros(perm.size, dtype=bool)
    taken[perm[perm >= 0]] = True
    free = iter(np.flatnonzero(~taken))
    for i in np.flatnonzero(perm < 0):
        perm[i] = next(free)
    return perm


def emd_approx(a, b, epsilon: float = DEFAULT_EPSILON, max_bids: int | None = None) -> EmdResult:
    """Auction solver with epsilon scaling.

    ``epsilon`` bounds the *total* excess cost: the returned matching's sum of
    distances is within ``epsilon`` of optimal (so the mean is within
    ``epsilon / N``).  The bidding increment starts at ``max_cost / 8`` and is
    divided by 4 each phase until it drops to ``epsilon / N``; prices carry
    over between phases.

    ``gap_bound`` is a certified relative bound ``(cost - optimum) / cost``
    from the final prices' dual objective, which is usually far tighter than
    the a-priori guarantee.
    """
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    x, y = _pair(a, b)
    n = x.shape[0]
    benefit = -cdist(x, y)
    if max_bids is None:
        max_bids = 2000 * n * max(1, int(np.log2(n)))
    target = epsilon / n
    eps = max(-benefit.min() / 8.0, target)
    prices = np.zeros(n)
    best = None
    spent = 0
    while True:
        owner = np.full(n, -1, dtype=np.int64)
        assigned = np.full(n, -1, dtype=np.int64)
        bids = _auction_phase(benefit, prices, owner, assigned, eps, max_bids - spent)
        if bids < 0:
            fallback = best if best is not None else _complete(assigned)
            raise SolverError(
                f"auction exceeded its budget of {max_bids} bids at eps={eps:.3g}",
                best=_result(x, y, fallback, False, "auction"),
            )
        spent += bids
        best = assigned.copy()
        if eps <= target:
            break
        eps = max(eps / 4.0, target)
    gap = max(_dual_gap(benefit, prices, assigned), 0.0)
    total = -benefit[np.arange(n), assigned].sum()
    if total > 0:
        rel_gap = min(gap / total, 1.0)
    else:
        rel_gap = 0.0
    return _result(x, y, assigned, False, "auction", rel_gap)


# --------------------------------------------------------------------------
# dispatch


def emd(a, b, cap: int = EXACT_CAP, epsilon: float = DEFAULT_EPSILON) -> EmdResult:
    """Exact matching up to ``cap`` points, auction above it."""
    n = _points(a).shape[0]
    if n <= cap:
        return emd_exact(a, b, cap=cap)
    return emd_approx(a, b, epsilon=epsilon)


def emd_distance(a, b, cap: int = EXACT_CAP, epsilon: float = DEFAULT_EPSILON) -> float:
    return emd(a, b, cap=cap, epsilon=epsilon).distance
