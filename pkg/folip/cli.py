"""
Command-line module.
Subcommands: solve a .fol problem, compile and solve an .mln program, and
check a model file against a problem. Flags override the FOLIP_*
environment configuration.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Optional

from folip import __version__
from folip.config import Config
from folip.errors import FolipError
from folip.mln import compile_mln, load_mln
from folip.parser import load_problem
from folip.problem import format_problem
from folip.report import read_model_file, render, render_check
from folip.separation import check_model
from folip.solver import INFEASIBLE, OPTIMAL, BranchPriceCutSolver

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_LIMIT = 2
EXIT_VIOLATION = 2
EXIT_INPUT = 3

COMMANDS = ("solve", "mln", "check")


@dataclass
class RunConfig:
    """Settings for one invocation: environment defaults overridden by flags."""

    command: str
    input: str
    time_limit: float = 1800.0
    node_limit: Optional[int] = None
    cut_rounds: Optional[int] = None
    gap: float = 1e-6
    seed: int = 0
    output_format: str = "text"
    model_path: Optional[str] = None
    output_path: Optional[str] = None
    compile_only: bool = False
    iff: bool = True
    eager: bool = False
    row_aging: bool = False
    row_age: int = 10
    trace_separation: bool = False
    minimal_model: bool = False
    cut_limit: int = 500
    dump_lp: Optional[str] = None
    int_tol: float = 1e-6
    sep_eps: float = 1e-6
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-9
    stall_limit: int = 50
    iteration_limit: int = 100000

    @classmethod
    def from_args(cls, args, config=None):
        """
        Merge parsed arguments over a Config.

        Raises:
            ValueError: when a limit is not positive or a subcommand needs a missing flag
        """
        config = config or Config()

        def pick(name, fallback):
            value = getattr(args, name, None)
            return fallback if value is None else value

        run_config = cls(
            command=args.command,
            input=args.input,
            time_limit=pick("time_limit", config.time_limit),
            node_limit=pick("node_limit", config.node_limit),
            cut_rounds=pick("cut_rounds", config.cut_rounds),
            gap=pick("gap", config.gap),
            seed=pick("seed", 0),
            output_format=pick("format", "text"),
            model_path=getattr(args, "model", None),
            output_path=getattr(args, "output", None),
            compile_only=bool(getattr(args, "compile_only", False)),
            iff=pick("iff", config.iff),
            eager=pick("eager", config.eager),
            row_aging=pick("row_aging", config.row_aging),
            row_age=pick("row_age", config.row_age),
            trace_separation=pick("trace_separation", config.trace_separation),
            minimal_model=pick("minimal_model", config.minimal_model),
            cut_limit=pick("cut_limit", config.cut_limit),
            dump_lp=getattr(args, "dump_lp", None),
            int_tol=pick("int_tol", config.int_tol),
            sep_eps=pick("sep_eps", config.sep_eps),
            feas_tol=pick("feas_tol", config.feas_tol),
            opt_tol=pick("opt_tol", config.opt_tol),
            pivot_tol=pick("pivot_tol", config.pivot_tol),
            stall_limit=config.stall_limit,
            iteration_limit=config.iteration_limit,
        )
        run_config.validate()
        return run_config

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown subcommand {self.command}")
        if self.time_limit <= 0:
            raise ValueError("--time-limit must be positive")
        for name in ("node_limit", "cut_rounds"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.gap < 0:
            raise ValueError("--gap must be nonnegative")
        if self.cut_limit <= 0 or self.row_age <= 0:
            raise ValueError("--cut-limit and --row-age must be positive")
        if self.command == "check" and not self.model_path:
            raise ValueError("check needs --model FILE")
        if self.compile_only and self.command != "mln":
            raise ValueError("--compile-only only applies to mln")

    def lp_config(self):
        return {
            "feas_tol": self.feas_tol,
            "opt_tol": self.opt_tol,
            "pivot_tol": self.pivot_tol,
            "stall_limit": self.stall_limit,
            "iteration_limit": self.iteration_limit,
        }

    def solver_config(self):
        return {
            "time_limit": self.time_limit,
            "node_limit": self.node_limit,
            "cut_rounds": self.cut_rounds,
            "gap": self.gap,
            "int_tol": self.int_tol,
            "sep_eps": self.sep_eps,
            "cut_limit": self.cut_limit,
            "row_aging": self.row_aging,
            "row_age": self.row_age,
            "minimal_model": self.minimal_model,
            "eager": self.eager,
            "trace_separation": self.trace_separation,
            "dump_path": self.dump_lp,
            "lp_config": self.lp_config(),
        }


def build_parser(config=None):
    """Build the argument parser; help texts show the environment defaults."""
    config = config or Config()
    parser = argparse.ArgumentParser(
        prog="folip-solve",
        description="Minimum-cost Herbrand models by branch-price-and-cut.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub):
        sub.add_argument("input", help="input file")
        sub.add_argument("--format", choices=("text", "structured"), help="report format (default: text)")

    def solving(sub):
        sub.add_argument("--time-limit", type=float, help=f"seconds (default: {config.time_limit:g})")
        sub.add_argument("--node-limit", type=int, help="max branch-and-bound nodes (default: none)")
        sub.add_argument("--cut-rounds", type=int, help="max separation rounds per node (default: none)")
        sub.add_argument("--gap", type=float, help=f"absolute optimality gap (default: {config.gap:g})")
        sub.add_argument("--seed", type=int, help="seed for randomized tie-breaks (none are randomized)")
        sub.add_argument("--eager", action="store_true", default=None, help="load variable-free clauses up front")
        sub.add_argument("--row-aging", action="store_true", default=None,
                         help=f"remove rows slack for --row-age LP solves (default: {config.row_age})")
        sub.add_argument("--row-age", type=int, help="LP solves a row may stay slack before removal")
        sub.add_argument("--trace-separation", action="store_true", default=None,
                         help="log every separation goal state")
        sub.add_argument("--minimal-model", action="store_true", default=None,
                         help="enable the forward-chaining primal heuristic")
        sub.add_argument("--cut-limit", type=int, help=f"cuts per clause per round (default: {config.cut_limit})")
        sub.add_argument("--int-tol", type=float, help=f"integrality tolerance (default: {config.int_tol:g})")
        sub.add_argument("--sep-eps", type=float, help=f"separation tolerance (default: {config.sep_eps:g})")
        sub.add_argument("--feas-tol", type=float, help=f"LP feasibility tolerance (default: {config.feas_tol:g})")
        sub.add_argument("--opt-tol", type=float, help=f"LP optimality tolerance (default: {config.opt_tol:g})")
        sub.add_argument("--pivot-tol", type=float, help=f"smallest pivot (default: {config.pivot_tol:g})")
        sub.add_argument("--dump-lp", metavar="FILE", help="write the root LP listing after its cut loop")

    solve_cmd = commands.add_parser("solve", help="solve a .fol problem")
    common(solve_cmd)
    solving(solve_cmd)

    mln_cmd = commands.add_parser("mln", help="compute a MAP state of an .mln program")
    common(mln_cmd)
    solving(mln_cmd)
    mln_cmd.add_argument("--iff", dest="iff", action="store_true", default=None,
                         help=f"emit reverse penalty clauses (default: {'on' if config.iff else 'off'})")
    mln_cmd.add_argument("--no-iff", dest="iff", action="store_false", default=None,
                         help="omit reverse penalty clauses")
    mln_cmd.add_argument("--compile-only", action="store_true", help="write the encoded problem and stop")
    mln_cmd.add_argument("--output", help="where --compile-only writes the .fol problem (default: stdout)")

    check_cmd = commands.add_parser("check", help="check a model file against a .fol problem")
    common(check_cmd)
    check_cmd.add_argument("--model", help="model file: one ground atom per line")
    return parser


def _exit_code(result):
    if result.status == OPTIMAL:
        return EXIT_OK
    if result.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_LIMIT


def run_solve(run_config):
    problem = load_problem(run_config.input)
    result = BranchPriceCutSolver(problem, **run_config.solver_config()).solve()
    print(render(result, run_config.output_format))
    return _exit_code(result)


def run_mln(run_config):
    compilation = compile_mln(load_mln(run_config.input), iff=run_config.iff)
    if run_config.compile_only:
        text = format_problem(compilation.problem)
        if run_config.output_path:
            with open(run_config.output_path, "w", encoding="utf-8") as handle:
                handle.write(text)
            logger.info(f"Wrote encoded problem to {run_config.output_path}")
        else:
            print(text, end="")
        return EXIT_OK
    result = BranchPriceCutSolver(compilation.problem, **run_config.solver_config()).solve()
    extra = {
        "groups": len(compilation.groups),
        "penalty_atoms": compilation.penalty_atoms,
        "map_constant": compilation.constant,
    }
    if result.objective is not None:
        extra["satisfied_weight"] = compilation.constant - result.objective
    print(render(result, run_config.output_format, extra))
    return _exit_code(result)


def run_check(run_config):
    problem = load_problem(run_config.input)
    violation = check_model(problem, read_model_file(run_config.model_path))
    print(render_check(violation, run_config.output_format))
    if violation is not None:
        logger.warning(f"Model violates {violation}")
        return EXIT_VIOLATION
    return EXIT_OK


def run(argv=None, config=None):
    """
    Run one command.

    Args:
        argv: argument list (defaults to sys.argv[1:])
        config: optional Config (read from the environment when omitted)

    Returns:
        int: exit status (0 optimal/ok, 1 no Herbrand model, 2 limit or
        violation, 3 input error)
    """
    try:
        config = config or Config()
    except ValueError as e:
        logger.error(f"Bad FOLIP_* environment value: {e}")
        return EXIT_INPUT
    if not config.validate():
        return EXIT_INPUT
    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        run_config = RunConfig.from_args(args, config)
    except ValueError as e:
        logger.error(str(e))
        return EXIT_INPUT
    handlers = {"solve": run_solve, "mln": run_mln, "check": run_check}
    try:
        return handlers[run_config.command](run_config)
    except OSError as e:
        logger.error(f"Cannot read input: {e}")
        return EXIT_INPUT
    except FolipError as e:
        logger.error(f"{run_config.input}: {e}")
        return EXIT_INPUT


def main(argv=None):
    """Main execution function."""
    sys.exit(run(argv))

