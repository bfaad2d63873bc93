"""
LP engine module.
Incremental bounded-variable linear programs solved by a dense tableau
simplex: two-phase primal simplex from scratch, and dual simplex plus
primal clean-up when a previous basis is available.

Problem form:  minimize c.x  subject to  A_r.x >= b_r for every row r,
lower_j <= x_j <= upper_j.  Each row gets a surplus column s_r >= 0 with
A_r.x - s_r = b_r, so the optimal dual of row r is the reduced cost of s_r.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from folip.errors import LpError

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

LOWER = 0
UPPER = 1
BASIC = 2

# tableau pivots after which an incremental restart reinverts the basis
REINVERT_AFTER = 500


@dataclass
class Row:
    """A sparse '>=' row."""

    coefs: Dict[int, float]
    rhs: float
    name: Optional[str] = None


@dataclass(frozen=True)
class WarmBasis:
    """A simplex basis expressed over stable column/row keys."""

    basic: Tuple[tuple, ...]
    at_upper: frozenset = frozenset()
    rows: frozenset = frozenset()


class LpModel:
    """Bounded-variable LP with rows and columns that can be added incrementally."""

    def __init__(self):
        self.costs: List[float] = []
        self.lower: List[float] = []
        self.upper: List[float] = []
        self.names: List[Optional[str]] = []
        self.rows: Dict[int, Row] = {}
        self._next_row = 0
        # tableau left by the last solve, reused when the caller warm starts from it
        self._tableau = None
        self._tableau_basis = None

    @property
    def n_cols(self):
        return len(self.costs)

    @property
    def n_rows(self):
        return len(self.rows)

    def add_col(self, cost, lower=0.0, upper=1.0, name=None):
        """
        Add one column.

        Returns:
            int: the new column index
        """
        if cost < 0 or math.isnan(cost):
            raise LpError(f"objective coefficient must be nonnegative, got {cost}")
        if not 0.0 <= lower <= upper <= 1.0:
            raise LpError(f"column bounds must satisfy 0 <= lower <= upper <= 1, got [{lower}, {upper}]")
        self.costs.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.names.append(name)
        return len(self.costs) - 1

    def add_cols(self, costs, lower=None, upper=None, names=None):
        """Add several columns; returns their indices."""
        indices = []
        for k, cost in enumerate(costs):
            indices.append(self.add_col(
                cost,
                lower[k] if lower is not None else 0.0,
                upper[k] if upper is not None else 1.0,
                names[k] if names is not None else None,
            ))
        return indices

    def add_row(self, coefs, rhs, name=None):
        """
        Add one '>=' row.

        Args:
            coefs: mapping column index -> coefficient
            rhs: right-hand side

        Returns:
            int: the row id (stable across later removals)

        Raises:
            LpError: "unknown column" for a dangling column reference
        """
        for col in coefs:
            if not 0 <= col < self.n_cols:
                raise LpError(f"unknown column {col}")
        row_id = self._next_row
        self._next_row += 1
        self.rows[row_id] = Row({c: float(v) for c, v in coefs.items() if v != 0}, float(rhs), name)
        return row_id

    def add_rows(self, rows):
        """Add several rows given as (coefs, rhs) or (coefs, rhs, name); returns their ids."""
        for row in rows:
            for col in row[0]:
                if not 0 <= col < self.n_cols:
                    raise LpError(f"unknown column {col}")
        return [self.add_row(*row) for row in rows]

    def remove_rows(self, row_ids):
        for row_id in row_ids:
            self.rows.pop(row_id, None)

    def set_bounds(self, col, lower, upper):
        if not 0.0 <= lower <= upper <= 1.0:
            raise LpError(f"column bounds must satisfy 0 <= lower <= upper <= 1, got [{lower}, {upper}]")
        self.lower[col] = float(lower)
        self.upper[col] = float(upper)

    def reset_bounds(self):
        """Restore every column to [0, 1]."""
        self.lower = [0.0] * self.n_cols
        self.upper = [1.0] * self.n_cols

    def col_name(self, col):
        return self.names[col] or f"x{col}"

    def dense(self):
        """Return (A, b, c, lower, upper, row_ids) as numpy arrays in row-id order."""
        row_ids = list(self.rows)
        A = np.zeros((len(row_ids), self.n_cols))
        b = np.zeros(len(row_ids))
        for r, row_id in enumerate(row_ids):
            row = self.rows[row_id]
            for col, coef in row.coefs.items():
                A[r, col] = coef
            b[r] = row.rhs
        return A, b, np.array(self.costs), np.array(self.lower), np.array(self.upper), row_ids


@dataclass
class LpSolution:
    """Result of lp_solve."""

    status: str
    x: np.ndarray
    objective: float = 0.0
    row_ids: List[int] = field(default_factory=list)
    duals: Optional[np.ndarray] = None
    farkas: Optional[np.ndarray] = None
    basis: Optional[WarmBasis] = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL

    def dual(self, row_id):
        return float(self.duals[self.row_ids.index(row_id)])

    def dual_map(self):
        return dict(zip(self.row_ids, self.duals.tolist()))


class _Tableau:
    """Dense simplex tableau T = B^-1 M over keyed columns."""

    def __init__(self, keys, T, beta, basis, status, z, lo, hi, cost, row_ids):
        self.keys = keys
        self.index = {key: k for k, key in enumerate(keys)}
        self.T = T
        self.beta = beta
        self.basis = basis
        self.status = status
        self.z = z
        self.lo = lo
        self.hi = hi
        self.cost = cost
        self.row_ids = row_ids
        self.d = None
        self.pivots = 0
        self.pivots_since_reinvert = 0

    def price(self):
        self.d = self.cost - self.cost[self.basis] @ self.T
        self.d[self.basis] = 0.0

    def values(self):
        v = self.z.copy()
        v[self.basis] = self.beta
        return v

    def objective(self):
        return float(self.cost @ self.values())

    def pivot(self, r, j):
        piv = self.T[r, j]
        self.T[r] /= piv
        column = self.T[:, j].copy()
        column[r] = 0.0
        self.T -= np.outer(column, self.T[r])
        self.T[:, j] = 0.0
        self.T[r, j] = 1.0
        self.d -= self.d[j] * self.T[r]
        self.d[j] = 0.0
        self.basis[r] = j
        self.status[j] = BASIC
        self.pivots += 1
        self.pivots_since_reinvert += 1

    def append_columns(self, keys, columns, values, lo, hi, cost, status):
        """Append k keyed columns; columns is an (m, k) block of B^-1 M."""
        self.T = np.hstack([self.T.reshape(len(self.basis), len(self.keys)), columns])
        for key in keys:
            self.index[key] = len(self.keys)
            self.keys.append(key)
        self.z = np.concatenate([self.z, values])
        self.lo = np.concatenate([self.lo, lo])
        self.hi = np.concatenate([self.hi, hi])
        self.cost = np.concatenate([self.cost, cost])
        self.status = np.concatenate([self.status, status])
        if self.d is not None:
            priced = cost - self.cost[self.basis] @ columns if len(self.basis) else np.array(cost, dtype=float)
            self.d = np.concatenate([self.d, priced])

    def drop_columns(self, cols):
        dropped = set(cols)
        keep = [k for k in range(len(self.keys)) if k not in dropped]
        remap = {old: new for new, old in enumerate(keep)}
        self.keys = [self.keys[k] for k in keep]
        self.index = {key: k for k, key in enumerate(self.keys)}
        self.T = self.T[:, keep]
        self.z, self.lo, self.hi = self.z[keep], self.lo[keep], self.hi[keep]
        self.cost, self.status = self.cost[keep], self.status[keep]
        if self.d is not None:
            self.d = self.d[keep]
        self.basis = [remap[b] for b in self.basis]

    def slack_columns(self):
        return [self.index[("s", row_id)] for row_id in self.row_ids]

    def warm_basis(self):
        at_upper = frozenset(self.keys[k] for k in range(len(self.keys)) if self.status[k] == UPPER)
        return WarmBasis(tuple(self.keys[b] for b in self.basis), at_upper, frozenset(self.row_ids))


class _Simplex:
    """Primal and dual bounded-variable simplex iterations over a _Tableau."""

    def __init__(self, feas_tol=1e-7, opt_tol=1e-7, pivot_tol=1e-9, stall_limit=50, iteration_limit=100000):
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.pivot_tol = pivot_tol
        self.stall_limit = stall_limit
        self.iteration_limit = iteration_limit

    def primal(self, tab):
        """Run primal simplex to optimality for tab.cost (tab.d must be priced)."""
        bland = False
        stalled = 0
        while True:
            if tab.pivots > self.iteration_limit:
                raise LpError("LP numerical failure: iteration limit reached")
            movable = (tab.hi - tab.lo) > self.feas_tol
            eligible = movable & (
                ((tab.status == LOWER) & (tab.d < -self.opt_tol))
                | ((tab.status == UPPER) & (tab.d > self.opt_tol))
            )
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(tab.d[candidates]))])
            direction = 1.0 if tab.status[j] == LOWER else -1.0
            alpha = direction * tab.T[:, j]
            lo_b = tab.lo[tab.basis]
            hi_b = tab.hi[tab.basis]
            limits = np.full(len(tab.basis), np.inf)
            down = alpha > self.pivot_tol
            up = (alpha < -self.pivot_tol) & np.isfinite(hi_b)
            limits[down] = (tab.beta[down] - lo_b[down]) / alpha[down]
            limits[up] = (hi_b[up] - tab.beta[up]) / (-alpha[up])
            limits = np.maximum(limits, 0.0)
            step = limits.min() if limits.size else np.inf
            flip = tab.hi[j] - tab.lo[j]
            if not np.isfinite(step) and not np.isfinite(flip):
                raise LpError("unbounded LP: all variables are bounded, so this is an internal error")
            if flip <= step:
                tab.beta -= direction * flip * tab.T[:, j]
                tab.status[j] = UPPER if direction > 0 else LOWER
                tab.z[j] = tab.hi[j] if direction > 0 else tab.lo[j]
                tab.pivots += 1
                stalled = 0
                continue
            ties = np.flatnonzero(limits <= step + 1e-12)
            if bland:
                r = int(min(ties, key=lambda k: tab.basis[k]))
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leaving = tab.basis[r]
            entering_value = tab.z[j] + direction * step
            tab.beta -= direction * step * tab.T[:, j]
            if alpha[r] > 0:
                tab.status[leaving], tab.z[leaving] = LOWER, tab.lo[leaving]
            else:
                tab.status[leaving], tab.z[leaving] = UPPER, tab.hi[leaving]
            tab.pivot(r, j)
            tab.beta[r] = entering_value
            stalled = stalled + 1 if step <= 1e-12 else 0
            if stalled > self.stall_limit and not bland:
                logger.debug("Simplex stalled, switching to Bland's rule")
                bland = True

    def dual(self, tab):
        """
        Run dual simplex until the basis is primal feasible.

        Returns:
            bool: False when a row proves primal infeasibility
        """
        bland = False
        stalled = 0
        while True:
            if tab.pivots > self.iteration_limit:
                raise LpError("LP numerical failure: iteration limit reached")
            lo_b = tab.lo[tab.basis]
            hi_b = tab.hi[tab.basis]
            infeasibility = np.maximum(lo_b - tab.beta, tab.beta - hi_b)
            if infeasibility.size == 0 or infeasibility.max() <= self.feas_tol:
                return True
            if bland:
                r = int(min(np.flatnonzero(infeasibility > self.feas_tol), key=lambda k: tab.basis[k]))
            else:
                r = int(np.argmax(infeasibility))
            below = tab.beta[r] < lo_b[r]
            target = lo_b[r] if below else hi_b[r]
            row = tab.T[r]
            movable = (tab.hi - tab.lo) > self.feas_tol
            at_lower = (tab.status == LOWER) & movable
            at_upper = (tab.status == UPPER) & movable
            if below:
                eligible = (at_lower & (row < -self.pivot_tol)) | (at_upper & (row > self.pivot_tol))
            else:
                eligible = (at_lower & (row > self.pivot_tol)) | (at_upper & (row < -self.pivot_tol))
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                return False
            ratios = np.abs(tab.d[candidates]) / np.abs(row[candidates])
            best = ratios.min()
            ties = candidates[ratios <= best + 1e-12]
            if bland:
                j = int(ties[0])
            else:
                j = int(ties[np.argmax(np.abs(row[ties]))])
            delta = (tab.beta[r] - target) / row[j]
            leaving = tab.basis[r]
            entering_value = tab.z[j] + delta
            tab.beta -= delta * tab.T[:, j]
            tab.status[leaving] = LOWER if below else UPPER
            tab.z[leaving] = target
            tab.pivot(r, j)
            tab.beta[r] = entering_value
            stalled = stalled + 1 if abs(delta) <= 1e-12 else 0
            if stalled > self.stall_limit and not bland:
                bland = True

    def restore_dual_feasibility(self, tab):
        """
        Move nonbasic columns with wrong-signed reduced cost to their other bound.

        Returns:
            bool: False if an unbounded column would have to move
        """
        wrong = np.flatnonzero(
            ((tab.status == LOWER) & (tab.d < -self.opt_tol)) | ((tab.status == UPPER) & (tab.d > self.opt_tol))
        )
        for j in wrong:
            if tab.hi[j] - tab.lo[j] <= self.feas_tol:
                continue
            if not np.isfinite(tab.hi[j]):
                return False
            new_value = tab.hi[j] if tab.status[j] == LOWER else tab.lo[j]
            tab.beta -= tab.T[:, j] * (new_value - tab.z[j])
            tab.z[j] = new_value
            tab.status[j] = UPPER if tab.status[j] == LOWER else LOWER
        return True


def _cold_tableau(model, simplex):
    """Phase 1 from the all-lower-bound point. Returns (tableau, farkas or None)."""
    A, b, c, lower, upper, row_ids = model.dense()
    m, n = A.shape
    residual = b - A @ lower
    keys = [("x", j) for j in range(n)] + [("s", rid) for rid in row_ids] + [("a", rid) for rid in row_ids]
    M = np.hstack([A, -np.eye(m), np.eye(m)])
    art_basic = residual > simplex.feas_tol
    basis = [n + m + i if art_basic[i] else n + i for i in range(m)]
    scale = np.where(art_basic, 1.0, -1.0)
    T = M * scale[:, None]
    beta = np.where(art_basic, residual, np.maximum(-residual, 0.0))
    lo = np.concatenate([lower, np.zeros(2 * m)])
    hi = np.concatenate([upper, np.full(m, np.inf), np.where(art_basic, np.inf, 0.0)])
    z = lo.copy()
    status = np.full(n + 2 * m, LOWER)
    status[basis] = BASIC
    phase1_cost = np.concatenate([np.zeros(n + m), np.ones(m)])
    tab = _Tableau(keys, T, beta, basis, status, z, lo, hi, phase1_cost, list(row_ids))
    tab.price()
    simplex.primal(tab)
    infeasibility = tab.objective()
    if infeasibility > simplex.feas_tol * max(1.0, m):
        farkas = np.array([max(tab.d[n + i], 0.0) for i in range(m)])
        logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3g}")
        return tab, farkas
    # phase 2: artificials pinned at zero, nonbasic ones dropped
    art_cols = list(range(n + m, n + 2 * m))
    tab.hi[art_cols] = 0.0
    tab.beta[[r for r, col in enumerate(tab.basis) if col >= n + m]] = 0.0
    tab.cost = np.concatenate([c, np.zeros(2 * m)])
    tab.drop_columns([col for col in art_cols if tab.status[col] != BASIC])
    tab.price()
    return tab, None


def _reinvert(model, warm):
    """Rebuild a tableau from a basis over the current model; None if the basis does not fit."""
    A, b, c, lower, upper, row_ids = model.dense()
    row_pos = {rid: r for r, rid in enumerate(row_ids)}
    m, n = len(row_ids), model.n_cols
    keys = [("x", j) for j in range(n)] + [("s", rid) for rid in row_ids]
    key_set = set(keys)
    basic = [key for key in warm.basic if key in key_set or (key[0] == "a" and key[1] in row_pos)]
    # rows added since the basis was taken enter with their surplus basic
    basic += [("s", rid) for rid in row_ids if rid not in warm.rows]
    if len(basic) != m or len(set(basic)) != m:
        return None
    artificials = [key for key in basic if key[0] == "a"]
    keys += artificials
    art_block = np.zeros((m, len(artificials)))
    for k, (_, rid) in enumerate(artificials):
        art_block[row_pos[rid], k] = 1.0
    M = np.hstack([A.reshape(m, n), -np.eye(m), art_block])
    index = {key: k for k, key in enumerate(keys)}
    basis = [index[key] for key in basic]
    lo = np.concatenate([lower, np.zeros(m + len(artificials))])
    hi = np.concatenate([upper, np.full(m, np.inf), np.zeros(len(artificials))])
    cost = np.concatenate([c, np.zeros(m + len(artificials))])
    status = np.array([UPPER if key in warm.at_upper and np.isfinite(hi[k]) else LOWER
                       for k, key in enumerate(keys)], dtype=int)
    status[basis] = BASIC
    z = np.where(status == UPPER, hi, lo)
    z[basis] = 0.0
    rhs = b - M @ z
    try:
        if m:
            solved = np.linalg.solve(M[:, basis], np.column_stack([M, rhs]))
        else:
            solved = np.zeros((0, len(keys) + 1))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(solved)):
        return None
    tab = _Tableau(keys, solved[:, :-1], solved[:, -1], basis, status, z, lo, hi, cost, row_ids)
    tab.price()
    return tab


def _sync(tab, model):
    """
    Bring a cached tableau up to date with rows, columns and bounds of the model.

    Returns:
        bool: False when an incremental update is impossible
    """
    removed = [rid for rid in tab.row_ids if rid not in model.rows]
    if removed:
        cols = []
        for rid in removed:
            col = tab.index[("s", rid)]
            if ("a", rid) in tab.index or tab.status[col] != BASIC:
                return False
            cols.append(col)
        rows = [tab.basis.index(col) for col in cols]
        tab.T = np.delete(tab.T, rows, axis=0)
        tab.beta = np.delete(tab.beta, rows)
        tab.basis = [b for r, b in enumerate(tab.basis) if r not in set(rows)]
        gone = set(removed)
        tab.row_ids = [rid for rid in tab.row_ids if rid not in gone]
        tab.drop_columns(cols)

    new_cols = [j for j in range(model.n_cols) if ("x", j) not in tab.index]
    if new_cols:
        position = {rid: r for r, rid in enumerate(tab.row_ids)}
        A_new = np.zeros((len(tab.row_ids), len(new_cols)))
        col_pos = {j: k for k, j in enumerate(new_cols)}
        for rid in tab.row_ids:
            for j, v in model.rows[rid].coefs.items():
                if j in col_pos:
                    A_new[position[rid], col_pos[j]] = v
        columns = -(tab.T[:, tab.slack_columns()] @ A_new)
        lower = np.array([model.lower[j] for j in new_cols])
        tab.beta -= columns @ lower
        tab.append_columns(
            [("x", j) for j in new_cols], columns, lower, lower,
            np.array([model.upper[j] for j in new_cols]), np.array([model.costs[j] for j in new_cols]),
            np.full(len(new_cols), LOWER),
        )

    new_rows = [rid for rid in model.rows if ("s", rid) not in tab.index]
    if new_rows:
        values = tab.values()
        C = np.zeros((len(new_rows), len(tab.keys)))
        rhs = np.zeros(len(new_rows))
        for r, rid in enumerate(new_rows):
            row = model.rows[rid]
            for j, v in row.coefs.items():
                C[r, tab.index[("x", j)]] = v
            rhs[r] = row.rhs
        reduced = C - C[:, tab.basis] @ tab.T if len(tab.basis) else C
        surplus = C @ values - rhs
        m_old, k = len(tab.basis), len(new_rows)
        tab.T = np.vstack([tab.T.reshape(m_old, len(tab.keys)), -reduced])
        tab.beta = np.concatenate([tab.beta, surplus])
        first = len(tab.keys)
        tab.basis.extend(range(first, first + k))
        tab.row_ids.extend(new_rows)
        block = np.vstack([np.zeros((m_old, k)), np.eye(k)])
        tab.append_columns(
            [("s", rid) for rid in new_rows], block, np.zeros(k), np.zeros(k), np.full(k, np.inf),
            np.zeros(k), np.full(k, BASIC),
        )
        if tab.d is not None:
            tab.d[first:] = 0.0

    for j in range(model.n_cols):
        k = tab.index[("x", j)]
        tab.lo[k], tab.hi[k] = model.lower[j], model.upper[j]
        if tab.status[k] == BASIC:
            continue
        target = tab.hi[k] if tab.status[k] == UPPER else tab.lo[k]
        if target != tab.z[k]:
            tab.beta -= tab.T[:, k] * (target - tab.z[k])
            tab.z[k] = target
    return True


def _extract(tab, model, simplex):
    values = tab.values()
    x = np.array([values[tab.index[("x", j)]] for j in range(model.n_cols)])
    x = np.clip(x, model.lower, model.upper) if model.n_cols else x
    duals = np.array([max(tab.d[tab.index[("s", rid)]], 0.0) for rid in tab.row_ids])
    objective = float(np.dot(model.costs, x)) if model.n_cols else 0.0
    return LpSolution(
        status=OPTIMAL,
        x=x,
        objective=objective,
        row_ids=list(tab.row_ids),
        duals=duals,
        basis=tab.warm_basis(),
        iterations=tab.pivots,
    )


def _rows_satisfied(model, x, tol):
    for row in model.rows.values():
        activity = sum(coef * x[col] for col, coef in row.coefs.items())
        if activity < row.rhs - tol:
            return False
    return True


def lp_solve(model, warm=None, feas_tol=1e-7, opt_tol=1e-7, pivot_tol=1e-9, stall_limit=50,
             iteration_limit=100000):
    """
    Solve the LP relaxation.

    Args:
        model: LpModel
        warm: optional WarmBasis from an earlier solve of this model
        feas_tol, opt_tol, pivot_tol: simplex tolerances
        stall_limit: degenerate pivots tolerated before Bland's rule
        iteration_limit: pivots per solve before giving up

    Returns:
        LpSolution: optimal with duals, or infeasible with Farkas multipliers

    Raises:
        LpError: "LP numerical failure" when the simplex cannot finish
    """
    simplex = _Simplex(feas_tol, opt_tol, pivot_tol, stall_limit, iteration_limit)
    if model.n_cols == 0 and model.n_rows == 0:
        model._tableau, model._tableau_basis = None, None
        return LpSolution(OPTIMAL, np.zeros(0), 0.0, [], np.zeros(0), basis=WarmBasis(()))

    if warm is not None:
        solution = _warm_solve(model, warm, simplex)
        if solution is not None:
            return solution
        logger.debug("Warm start unusable, solving from scratch")

    tab, farkas = _cold_tableau(model, simplex)
    if farkas is not None:
        model._tableau, model._tableau_basis = None, None
        return LpSolution(
            status=INFEASIBLE,
            x=np.zeros(model.n_cols),
            objective=math.inf,
            row_ids=list(tab.row_ids),
            farkas=farkas,
            iterations=tab.pivots,
        )
    simplex.primal(tab)
    solution = _extract(tab, model, simplex)
    if not _rows_satisfied(model, solution.x, max(feas_tol * 100, 1e-6)):
        raise LpError("LP numerical failure: solution violates rows beyond tolerance")
    model._tableau, model._tableau_basis = tab, solution.basis
    return solution


def _warm_solve(model, warm, simplex):
    """Dual simplex from a previous basis; None means fall back to a cold start."""
    tab = None
    if warm is model._tableau_basis and model._tableau is not None \
            and model._tableau.pivots_since_reinvert < REINVERT_AFTER:
        tab = model._tableau
        if not _sync(tab, model):
            tab = None
    if tab is None:
        tab = _reinvert(model, warm)
        if tab is None:
            return None
    model._tableau, model._tableau_basis = None, None
    tab.pivots = 0
    try:
        if not simplex.restore_dual_feasibility(tab):
            return None
        if not simplex.dual(tab):
            # infeasible: redo from scratch so the certificate comes from phase 1
            return None
        simplex.primal(tab)
    except LpError as e:
        logger.debug(f"Warm start failed ({e}), solving from scratch")
        return None
    solution = _extract(tab, model, simplex)
    if not _rows_satisfied(model, solution.x, max(simplex.feas_tol * 100, 1e-6)):
        return None
    model._tableau, model._tableau_basis = tab, solution.basis
    return solution


def reduced_cost(model, solution, col):
    """
    Reduced cost c_j - sum_r y_r a_rj of a column.

    Raises:
        LpError: when the solution is not optimal
    """
    if solution.status != OPTIMAL:
        raise LpError("reduced cost requires an optimal LP solution")
    duals = solution.dual_map()
    total = model.costs[col]
    for row_id, row in model.rows.items():
        coef = row.coefs.get(col)
        if coef:
            total -= duals.get(row_id, 0.0) * coef
    return total


def dual_objective(model, solution):
    """Objective of the bounded dual at the solution's duals (equals the primal at optimality)."""
    A, b, c, lower, upper, row_ids = model.dense()
    y = np.array([solution.dual(rid) for rid in row_ids]) if row_ids else np.zeros(0)
    d = c - (y @ A if row_ids else np.zeros(len(c)))
    return float(y @ b + np.sum(np.where(d > 0, d * lower, d * upper)))


def dump_lp(model):
    """Human-readable listing of the LP, for cross-checking by hand."""

    def linear(terms):
        text = ""
        for col, coef in terms:
            factor = "" if abs(coef) == 1 else f"{abs(coef):g} "
            if not text:
                text = f"{'-' if coef < 0 else ''}{factor}{model.col_name(col)}"
            else:
                text += f" {'-' if coef < 0 else '+'} {factor}{model.col_name(col)}"
        return text or "0"

    lines = ["minimize"]
    lines.append("  obj: " + linear((j, c) for j, c in enumerate(model.costs) if c))
    lines.append("subject to")
    for row_id, row in model.rows.items():
        label = row.name or f"r{row_id}"
        lines.append(f"  {label}: {linear(sorted(row.coefs.items()))} >= {row.rhs:g}")
    lines.append("bounds")
    for j in range(model.n_cols):
        lines.append(f"  {model.lower[j]:g} <= {model.col_name(j)} <= {model.upper[j]:g}")
    lines.append("end")
    return "\n".join(lines) + "\n"
