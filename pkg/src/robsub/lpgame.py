"""Exact minimax solution of finite zero-sum games via linear programming."""

import numpy as np
from scipy.optimize import linprog

from .errors import RobsubError


def solve_zero_sum(payoff):
    """Solve max_p min_q p' P q for a (rows x cols) payoff matrix.

    Returns (value, row_strategy, col_strategy). Two LPs are solved so both
    players' optimal mixtures come straight from a primal.
    """
    P = np.asarray(payoff, dtype=np.float64)
    if P.ndim != 2 or P.size == 0:
        raise RobsubError("payoff matrix must be 2-d and nonempty")
    nr, nc = P.shape

    # Row player: max v s.t. P' p >= v, sum p = 1, p >= 0.
    c = np.zeros(nr + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-P.T, np.ones((nc, 1))])
    b_ub = np.zeros(nc)
    A_eq = np.zeros((1, nr + 1))
    A_eq[0, :nr] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * nr + [(None, None)], method="highs")
    if not res.success:
        raise RobsubError(f"row LP failed: {res.message}")
    p = np.clip(res.x[:nr], 0.0, None)
    p /= p.sum()
    value = float(res.x[-1])

    # Column player: min u s.t. P q <= u, sum q = 1, q >= 0.
    c2 = np.zeros(nc + 1)
    c2[-1] = 1.0
    A_ub2 = np.hstack([P, -np.ones((nr, 1))])
    b_ub2 = np.zeros(nr)
    A_eq2 = np.zeros((1, nc + 1))
    A_eq2[0, :nc] = 1.0
    res2 = linprog(c2, A_ub=A_ub2, b_ub=b_ub2, A_eq=A_eq2, b_eq=[1.0],
                   bounds=[(0, None)] * nc + [(None, None)], method="highs")
    if not res2.success:
        raise RobsubError(f"column LP failed: {res2.message}")
    q = np.clip(res2.x[:nc], 0.0, None)
    q /= q.sum()
    return value, p, q
