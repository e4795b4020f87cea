"""Sequential minimal optimisation for the C-SVM dual.

Solves ``min 1/2 a'Qa - e'a`` s.t. ``y'a = 0``, ``0 <= a <= C`` with
``Q_ij = y_i y_j K_ij`` on a precomputed kernel matrix, using maximal-violating
pair selection with second-order choice of the second index.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TAU = 1e-12


@njit(cache=True)
def _solve(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = -np.ones(n)
    QD = np.empty(n)
    for t in range(n):
        QD[t] = K[t, t]
    it = 0
    gap = np.inf
    while True:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -G[t] > gmax:
                    gmax = -G[t]
                    i = t
            elif alpha[t] > 0 and G[t] > gmax:
                gmax = G[t]
                i = t
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        if i >= 0:
            for t in range(n):
                if y[t] > 0:
                    if not alpha[t] > 0:
                        continue
                elif not alpha[t] < C:
                    continue
                yg = y[t] * G[t]
                if yg > gmax2:
                    gmax2 = yg
                grad_diff = gmax + yg
                if grad_diff > 0:
                    quad = QD[i] + QD[t] - 2.0 * K[i, t]
                    if quad <= 0:
                        quad = TAU
                    obj = -(grad_diff * grad_diff) / quad
                    if obj < obj_min:
                        obj_min = obj
                        j = t
        gap = gmax + gmax2
        if i < 0 or j < 0 or gap < tol:
            break
        if it >= max_iter:
            break
        it += 1

        ai_old = alpha[i]
        aj_old = alpha[j]
        quad = QD[i] + QD[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
                if ai < 0:
                    ai = 0.0
                    aj = s
        alpha[i] = ai
        alpha[j] = aj
        dai = (ai - ai_old) * y[i]
        daj = (aj - aj_old) * y[j]
        for t in range(n):
            G[t] += y[t] * (K[t, i] * dai + K[t, j] * daj)

    # offset: average over free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(n):
        yg = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if y[t] > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = (ub + lb) / 2.0
    return alpha, -rho, it, gap


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
               max_iter: int = 1_000_000) -> tuple[np.ndarray, float, int, float]:
    """Return ``(alpha, bias, iterations, final_gap)``.

    ``final_gap`` is the largest KKT violation (max violating pair gap); the
    run converged iff it is below ``tol``.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    alpha, bias, it, gap = _solve(K, y, float(C), float(tol), int(max_iter))
    return np.clip(alpha, 0.0, C), float(bias), int(it), float(gap)
