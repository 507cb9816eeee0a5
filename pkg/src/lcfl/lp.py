"""Small dense two-phase simplex with Bland's anti-cycling rule.

Solves ``max c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``,
``x >= 0``.  Meant for the desk-scale benchmark programs in this package
(a few dozen rows, up to ~10^4 columns); no sparsity, no presolve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
FEAS_TOL = 1e-9


class LPInfeasible(ValueError):
    """Raised with a Farkas certificate ``y`` over the stacked rows ``[ub; eq]``.

    The certificate satisfies ``y @ A <= 0`` on every column, ``y[:m_ub] <= 0``
    and ``y @ b > 0``, which rules out any feasible point.
    """

    def __init__(self, message: str, certificate: np.ndarray, infeasibility: float):
        super().__init__(message)
        self.certificate = certificate
        self.infeasibility = infeasibility


class LPUnbounded(ValueError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    basis: np.ndarray
    iterations: int


def _pivot(tab: np.ndarray, row: int, col: int):
    tab[row] /= tab[row, col]
    others = np.flatnonzero(tab[:, col])
    others = others[others != row]
    tab[others] -= np.outer(tab[others, col], tab[row])


def _run(tab: np.ndarray, basis: np.ndarray, allowed: int, max_iter: int) -> int:
    """Minimize the objective stored in the last row (reduced costs) in place.

    Only columns ``< allowed`` may enter.  Returns the number of pivots.
    """
    m = tab.shape[0] - 1
    for it in range(max_iter):
        cost = tab[-1, :allowed]
        entering = np.flatnonzero(cost < -PIVOT_TOL)
        if entering.size == 0:
            return it
        col = int(entering[0])  # Bland: lowest index with negative reduced cost
        column = tab[:m, col]
        positive = np.flatnonzero(column > PIVOT_TOL)
        if positive.size == 0:
            raise LPUnbounded(f"objective unbounded along column {col}")
        ratios = tab[positive, -1] / column[positive]
        best = ratios.min()
        tied = positive[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = int(tied[np.argmin(basis[tied])])  # Bland: lowest basic index
        _pivot(tab, row, col)
        basis[row] = col
    raise RuntimeError(f"simplex did not terminate in {max_iter} pivots")


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 100_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # Equality form: [A_ub I; A_eq 0] [x; s] = b, rows flipped so b >= 0.
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    n_struct = n + m_ub

    # Phase I: artificials on every row, minimize their sum.
    tab = np.zeros((m + 1, n_struct + m + 1))
    tab[:m, :n_struct] = A
    tab[:m, n_struct:n_struct + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n_struct] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = np.arange(n_struct, n_struct + m)
    iters = _run(tab, basis, n_struct, max_iter)

    infeasibility = -tab[-1, -1]
    if infeasibility > FEAS_TOL:
        # Phase-I duals: y = c_B B^-1 with unit costs on artificials; B^-1 sits
        # under the artificial block, and reduced cost there equals 1 - y.
        y = 1.0 - tab[-1, n_struct:n_struct + m]
        cert = y * sign
        raise LPInfeasible(
            f"constraints infeasible (phase-I residual {infeasibility:.3g})", cert, float(infeasibility)
        )

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= n_struct:
            candidates = np.flatnonzero(np.abs(tab[r, :n_struct]) > PIVOT_TOL)
            if candidates.size:
                _pivot(tab, r, int(candidates[0]))
                basis[r] = candidates[0]
            else:
                keep[r] = False
    rows = np.concatenate([np.flatnonzero(keep), [m]])
    tab = np.delete(tab[rows], np.s_[n_struct:n_struct + m], axis=1)
    basis = basis[keep]

    # Phase II on -c (the runner minimizes).
    cost = np.zeros(n_struct)
    cost[:n] = -c
    tab[-1, :] = 0.0
    tab[-1, :n_struct] = cost
    for r, j in enumerate(basis):
        tab[-1] -= cost[j] * tab[r]
    iters += _run(tab, basis, n_struct, max_iter)

    z = np.zeros(n_struct)
    z[basis] = tab[:-1, -1]
    x = np.clip(z[:n], 0.0, None)
    return LPResult(x=x, objective=float(c @ x), basis=basis.copy(), iterations=iters)
