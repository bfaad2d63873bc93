"""
Branch-price-and-cut module.
Cut loop with simultaneous column creation, best-bound branch and bound
over fractional atoms, incumbent management and primal heuristics.
"""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from folip.errors import SolverError
from folip.lp import LpModel, dump_lp, lp_solve
from folip.separation import ClauseSeparator, CutPool, SolutionView, check_model, format_cut
from folip.terms import AtomTable, format_atom

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
LIMIT = "limit-reached"


@dataclass
class BnbNode:
    """A branch-and-bound node: fixings, local bound and the parent's basis."""

    fixings: Dict[int, int] = field(default_factory=dict)
    bound: float = 0.0
    depth: int = 0
    basis: object = None


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    lp_iterations: int = 0
    cuts_added: int = 0
    cuts_by_clause: Dict[str, int] = field(default_factory=dict)
    columns_created: int = 0
    cut_rounds: int = 0
    rows_removed: int = 0
    root_bound: Optional[float] = None
    root_bounds: List[float] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "nodes": self.nodes,
            "lp_solves": self.lp_solves,
            "lp_iterations": self.lp_iterations,
            "cuts_added": self.cuts_added,
            "cuts_by_clause": dict(sorted(self.cuts_by_clause.items())),
            "columns_created": self.columns_created,
            "cut_rounds": self.cut_rounds,
            "rows_removed": self.rows_removed,
            "root_bound": self.root_bound,
            "wall_time": round(self.wall_time, 6),
        }


@dataclass(frozen=True)
class SolveResult:
    """
    Outcome of a solve.

    objective and best_bound include the problem's constant offset. model
    lists the true atoms sorted by atom id.
    """

    status: str
    objective: Optional[float]
    model: tuple
    best_bound: float
    stats: SolveStats

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class CutLoopResult:
    status: str
    bound: float = math.inf
    x: Optional[np.ndarray] = None
    basis: object = None


class BranchPriceCutSolver:
    """Minimum-cost Herbrand model search over lazily generated rows and columns."""

    def __init__(self, problem, time_limit=1800.0, node_limit=None, cut_rounds=None, gap=1e-6, int_tol=1e-6,
                 sep_eps=1e-6, cut_limit=500, row_aging=False, row_age=10, minimal_model=False, eager=False,
                 trace_separation=False, lp_config=None, dump_path=None):
        """
        Initialize the solver.

        Args:
            problem: Problem to solve
            time_limit: wall-clock seconds
            node_limit: max nodes processed (None for no limit)
            cut_rounds: max separation rounds per node (None for no limit)
            gap: absolute optimality gap
            int_tol: integrality tolerance
            sep_eps: separation violation tolerance
            cut_limit: max cuts per clause per round
            row_aging: remove rows that stay slack for row_age LP solves
            minimal_model: run the forward-chaining primal heuristic
            eager: load variable-free clauses before the root LP
            trace_separation: log every goal state of the separation search
            lp_config: keyword arguments for lp_solve
            dump_path: file that receives the root LP listing after its cut loop
        """
        self.problem = problem
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.cut_rounds = cut_rounds
        self.gap = gap
        self.int_tol = int_tol
        self.sep_eps = sep_eps
        self.cut_limit = cut_limit
        self.row_aging = row_aging and not problem.ground_mode
        self.row_age = row_age
        self.minimal_model = minimal_model
        self.eager = eager or problem.ground_mode
        self.lp_config = lp_config or {}
        self.dump_path = dump_path

        self.table = AtomTable()
        self.lp = LpModel()
        self.pool = CutPool()
        self.separator = ClauseSeparator(problem, self.table, sep_eps, trace_separation)
        self.stats = SolveStats()
        self.incumbent: Optional[frozenset] = None
        self.incumbent_cost = math.inf
        self._slack_age: Dict[int, int] = {}
        self._start = None
        self.integral_costs = all(
            isinstance(rule.expr, (int, float)) and float(rule.expr).is_integer() for rule in problem.cost_rules
        )

    # -- LP bookkeeping ---------------------------------------------------

    def _sync_columns(self):
        """Give every interned atom an LP column; column index equals atom id."""
        for atom_id in range(self.lp.n_cols, len(self.table)):
            self.lp.add_col(self.problem.cost_of(self.table.atom(atom_id)), name=self.table.text(atom_id))
            self.stats.columns_created += 1

    def _add_cuts(self, cuts):
        """Add rows for cuts not already in the LP; returns how many were added."""
        self._sync_columns()
        added = 0
        for cut in cuts:
            if self.pool.is_active(cut):
                continue
            coefs, rhs = cut.row()
            row_id = self.lp.add_row(coefs, rhs, name=cut.clause)
            self.pool.activate(cut, row_id)
            self._slack_age[row_id] = 0
            self.stats.cuts_added += 1
            self.stats.cuts_by_clause[cut.clause] = self.stats.cuts_by_clause.get(cut.clause, 0) + 1
            logger.debug(f"Added cut {format_cut(cut, self.table)}")
            added += 1
        return added

    def _apply_fixings(self, fixings):
        self.lp.reset_bounds()
        for atom_id, value in fixings.items():
            self.lp.set_bounds(atom_id, value, value)

    def _age_rows(self, x):
        tol = self.lp_config.get("feas_tol", 1e-7)
        removed = []
        for row_id, row in self.lp.rows.items():
            activity = sum(coef * x[col] for col, coef in row.coefs.items())
            if activity - row.rhs > tol:
                self._slack_age[row_id] = self._slack_age.get(row_id, 0) + 1
                if self._slack_age[row_id] >= self.row_age:
                    removed.append(row_id)
            else:
                self._slack_age[row_id] = 0
        if removed:
            self.lp.remove_rows(removed)
            for row_id in removed:
                self.pool.deactivate(row_id)
                self._slack_age.pop(row_id, None)
            self.stats.rows_removed += len(removed)
            logger.debug(f"Row aging removed {len(removed)} rows")

    def _out_of_time(self):
        return time.monotonic() - self._start > self.time_limit

    def load_eager(self):
        """Load every variable-free clause as rows before the root LP."""
        cuts = []
        for clause in self.problem.clauses:
            if clause.is_ground():
                cuts.extend(cut for cut, _ in self.separator.ground_rows(clause))
        added = self._add_cuts(cuts)
        logger.info(f"Eagerly loaded {added} ground rows over {len(self.table)} atoms")

    def write_lp(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(dump_lp(self.lp))
        logger.info(f"Wrote the root LP ({self.lp.n_cols} columns, {len(self.lp.rows)} rows) to {path}")

    # -- node processing ----------------------------------------------------

    def separate_all(self, x):
        view = SolutionView.from_lp(self.table, x, threshold=self.sep_eps)
        cuts = []
        for clause in self.problem.clauses:
            for cut, _ in self.separator.separate(clause, view, self.cut_limit):
                cuts.append(cut)
        return cuts

    def cut_loop(self, node):
        """
        Solve the node LP, separating and adding cuts until none is violated.

        Returns:
            CutLoopResult with status optimal, infeasible or limit-reached
        """
        self._apply_fixings(node.fixings)
        warm = node.basis
        rounds = 0
        while True:
            if self._out_of_time():
                return CutLoopResult(LIMIT, node.bound, basis=warm)
            solution = lp_solve(self.lp, warm, **self.lp_config)
            self.stats.lp_solves += 1
            self.stats.lp_iterations += solution.iterations
            if not solution.optimal:
                return CutLoopResult(INFEASIBLE)
            warm = solution.basis
            x = solution.x
            if node.depth == 0:
                self.stats.root_bounds.append(solution.objective)
            if self.row_aging:
                self._age_rows(x)
            if self.problem.ground_mode:
                return CutLoopResult(OPTIMAL, solution.objective, x, warm)
            cuts = self.separate_all(x)
            if not cuts:
                return CutLoopResult(OPTIMAL, solution.objective, x, warm)
            rounds += 1
            self.stats.cut_rounds += 1
            if self.cut_rounds is not None and rounds > self.cut_rounds:
                logger.warning(f"Cut round limit {self.cut_rounds} reached at depth {node.depth}")
                return CutLoopResult(LIMIT, solution.objective, x, warm)
            if self._add_cuts(cuts) == 0:
                logger.warning("Separation only found rows already in the LP, stopping the cut loop")
                return CutLoopResult(OPTIMAL, solution.objective, x, warm)
            logger.debug(f"Cut round {rounds}: {len(cuts)} cuts, LP bound {solution.objective:.6g}")

    def _fractional(self, x):
        return [j for j, v in enumerate(x) if min(v, 1.0 - v) > self.int_tol]

    def branch(self, node, x):
        """
        Split a node on the most fractional atom (smallest id on ties).

        Returns:
            (child fixing the atom to 0, child fixing it to 1)

        Raises:
            SolverError: "nothing to branch on" when x is integral
        """
        fractional = self._fractional(x)
        if not fractional:
            raise SolverError("nothing to branch on")
        # distances within int_tol count as a tie
        bucket = max(self.int_tol, 1e-9)
        atom_id = min(fractional, key=lambda j: (round(abs(x[j] - 0.5) / bucket), j))
        logger.debug(f"Branching on {self.table.text(atom_id)} = {x[atom_id]:.4f}")
        children = []
        for value in (0, 1):
            fixings = dict(node.fixings)
            fixings[atom_id] = value
            children.append(BnbNode(fixings, node.bound, node.depth + 1, node.basis))
        return children[0], children[1]

    def model_cost(self, atoms):
        return sum(self.problem.cost_of(atom) for atom in atoms)

    def submit(self, atoms, source):
        """Offer a candidate model; it becomes the incumbent if it is a model and cheaper."""
        atoms = frozenset(atoms)
        cost = self.model_cost(atoms)
        if cost >= self.incumbent_cost - 1e-9:
            return False
        violation = check_model(self.problem, atoms, self.table)
        if violation is not None:
            logger.debug(f"{source} candidate rejected: {violation}")
            return False
        self.incumbent = atoms
        self.incumbent_cost = cost
        logger.info(f"New incumbent from {source}: cost {cost + self.problem.offset:.6g}")
        return True

    def simple_rounding(self, x):
        """
        Round values >= 0.5 up and the rest down, then check the result.

        Returns:
            frozenset of true atoms, or None when the rounded point is not a model
        """
        atoms = frozenset(self.table.atom(j) for j, v in enumerate(x) if v >= 0.5)
        if check_model(self.problem, atoms, self.table) is not None:
            return None
        return atoms

    def _lp_value(self, atom, x):
        atom_id = self.table.lookup(atom)
        if x is None or atom_id is None or atom_id >= len(x):
            return 0.0
        return float(x[atom_id])

    def minimal_model_heuristic(self, node, x=None, max_steps=200):
        """
        Forward chaining from the atoms fixed to 1. Each violated instance is
        repaired by adding one of its positive atoms that is not fixed to 0,
        trying the atoms with the largest LP value first and backtracking
        when an instance has nothing left to add.

        Returns:
            frozenset of true atoms, or None when no model turns up within max_steps checks
        """
        fixed_false = {self.table.atom(j) for j, v in node.fixings.items() if v == 0}
        stack = [frozenset(self.table.atom(j) for j, v in node.fixings.items() if v == 1)]
        tried = set()
        for _ in range(max_steps):
            if not stack:
                return None
            atoms = stack.pop()
            if atoms in tried:
                continue
            tried.add(atoms)
            violation = check_model(self.problem, atoms, self.table)
            if violation is None:
                return atoms
            options = [atom for atom in violation.pos if atom not in fixed_false and atom not in atoms]
            options.sort(key=lambda atom: self._lp_value(atom, x), reverse=True)
            stack.extend(atoms | {atom} for atom in reversed(options))
        return None

    def _prunable(self, bound):
        if self.incumbent is None:
            return False
        if self.integral_costs and math.isfinite(bound):
            bound = math.ceil(bound - 1e-6)
        return bound >= self.incumbent_cost - self.gap

    def solve(self):
        """
        Run branch-price-and-cut.

        Returns:
            SolveResult
        """
        self._start = time.monotonic()
        logger.info(f"Solving {len(self.problem.clauses)} clauses (ground mode: {self.problem.ground_mode})")
        if self.eager:
            self.load_eager()
        counter = itertools.count()
        heap = [(0.0, 0, next(counter), BnbNode())]
        limit_bounds = []

        while heap:
            if self._out_of_time() or (self.node_limit is not None and self.stats.nodes >= self.node_limit):
                logger.warning(f"Limit reached after {self.stats.nodes} nodes")
                break
            bound, _, _, node = heapq.heappop(heap)
            if self._prunable(bound):
                continue
            self.stats.nodes += 1
            result = self.cut_loop(node)
            if node.depth == 0 and self.stats.root_bounds:
                self.stats.root_bound = self.stats.root_bounds[-1]
                if self.dump_path:
                    self.write_lp(self.dump_path)
            if result.status == INFEASIBLE:
                logger.debug(f"Node at depth {node.depth} is LP-infeasible")
                continue
            if result.status == LIMIT:
                limit_bounds.append(max(result.bound, node.bound))
                break
            node.bound = max(node.bound, result.bound)
            node.basis = result.basis
            if self._prunable(node.bound):
                continue
            x = result.x
            if not self._fractional(x):
                self.submit((self.table.atom(j) for j, v in enumerate(x) if v > 0.5), "LP")
                continue
            rounded = self.simple_rounding(x)
            if rounded is not None:
                self.submit(rounded, "rounding")
            if self.minimal_model:
                chained = self.minimal_model_heuristic(node, x)
                if chained is not None:
                    self.submit(chained, "minimal model")
            if self._prunable(node.bound):
                continue
            for child in self.branch(node, x):
                heapq.heappush(heap, (child.bound, -child.depth, next(counter), child))

        self.stats.wall_time = time.monotonic() - self._start
        return self._result(heap, limit_bounds)

    def _result(self, heap, limit_bounds):
        offset = self.problem.offset
        open_bounds = [entry[0] for entry in heap if not self._prunable(entry[0])] + limit_bounds
        if not open_bounds:
            if self.incumbent is None:
                logger.info("No Herbrand model exists")
                return SolveResult(INFEASIBLE, None, (), math.inf, self.stats)
            model = self._sorted_model(self.incumbent)
            violation = check_model(self.problem, model, self.table)
            if violation is not None:
                raise SolverError(f"internal error: incumbent fails the model check ({violation})")
            objective = self.incumbent_cost + offset
            logger.info(f"Optimal model with {len(model)} true atoms, objective {objective:.6g}")
            return SolveResult(OPTIMAL, objective, model, objective, self.stats)
        best_bound = min(open_bounds)
        if self.incumbent is not None:
            best_bound = min(best_bound, self.incumbent_cost)
            objective = self.incumbent_cost + offset
            model = self._sorted_model(self.incumbent)
        else:
            objective, model = None, ()
        logger.warning(f"Stopped at a limit: best bound {best_bound + offset:.6g}")
        return SolveResult(LIMIT, objective, model, best_bound + offset, self.stats)

    def _sorted_model(self, atoms):
        return tuple(sorted(atoms, key=lambda atom: (self.table.intern(atom), format_atom(atom))))


def solve(problem, **kwargs):
    """Solve a problem with BranchPriceCutSolver; keyword arguments as for its constructor."""
    return BranchPriceCutSolver(problem, **kwargs).solve()
