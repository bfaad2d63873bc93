"""
Reporting module.
Text and structured (JSON) rendering of solve, check and MLN compile
results, and reading of model files.
"""

import json
import logging

from folip.errors import Diagnostic, ParseError
from folip.solver import INFEASIBLE, LIMIT, OPTIMAL
from folip.syntax import parse_atom
from folip.terms import format_atom, format_substitution

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

STATUS_TEXT = {
    OPTIMAL: "optimal",
    INFEASIBLE: "no Herbrand model",
    LIMIT: "limit reached",
}


def format_number(value):
    """Render a real for reports; None and infinities stay readable."""
    if value is None:
        return None
    if value in (float("inf"), float("-inf")):
        return "inf" if value > 0 else "-inf"
    return repr(float(round(value, 9)))


def result_to_dict(result, extra=None):
    """
    Build the structured report for a SolveResult.

    Args:
        result: SolveResult
        extra: optional dict merged in (e.g. MLN compile figures)

    Returns:
        dict following schema version 1
    """
    best_bound = result.best_bound
    report = {
        "schema_version": SCHEMA_VERSION,
        "status": result.status,
        "message": STATUS_TEXT[result.status],
        "objective": result.objective,
        "best_bound": best_bound if best_bound not in (float("inf"), float("-inf")) else None,
        "model": [format_atom(atom) for atom in result.model],
        "stats": result.stats.to_dict(),
    }
    if extra:
        report.update(extra)
    return report


def format_structured(result, extra=None):
    return json.dumps(result_to_dict(result, extra), indent=2)


def format_text(result, extra=None):
    """Render a SolveResult as the human-readable report."""
    lines = [f"status: {STATUS_TEXT[result.status]}"]
    if result.objective is not None:
        lines.append(f"objective: {format_number(result.objective)}")
    lines.append(f"best bound: {format_number(result.best_bound)}")
    if result.objective is not None:
        lines.append(f"model ({len(result.model)} true atoms):")
        lines.extend(f"  {format_atom(atom)}" for atom in result.model)
    for key, value in (extra or {}).items():
        lines.append(f"{key.replace('_', ' ')}: {format_number(value) if isinstance(value, float) else value}")
    stats = result.stats.to_dict()
    lines.append("statistics:")
    for key, value in stats.items():
        if key == "cuts_by_clause":
            lines.append("  cuts by clause:")
            lines.extend(f"    {name}: {count}" for name, count in value.items())
        elif isinstance(value, float):
            lines.append(f"  {key.replace('_', ' ')}: {format_number(value)}")
        else:
            lines.append(f"  {key.replace('_', ' ')}: {value}")
    return "\n".join(lines)


def render(result, output_format="text", extra=None):
    if output_format == "structured":
        return format_structured(result, extra)
    return format_text(result, extra)


def render_check(violation, output_format="text"):
    """Render the outcome of check_model (None means the model is ok)."""
    if output_format == "structured":
        report = {"schema_version": SCHEMA_VERSION, "status": "ok" if violation is None else "violation"}
        if violation is not None:
            report["clause"] = violation.clause
            report["grounding"] = format_substitution(violation.theta)
        return json.dumps(report, indent=2)
    if violation is None:
        return "status: ok"
    return f"status: violation\nclause: {violation.clause}\ngrounding: {format_substitution(violation.theta)}"


def read_model(text):
    """
    Parse a model file: one ground atom per line, blank lines and '%' comments ignored.

    Returns:
        list of Atom in file order
    """
    atoms = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.split("%", 1)[0].strip():
            continue
        atom = parse_atom(line, first_line=number)
        if not atom.is_ground():
            raise ParseError([Diagnostic(number, 1, f"model atom {format_atom(atom)} is not ground")])
        atoms.append(atom)
    logger.debug(f"Read model with {len(atoms)} atoms")
    return atoms


def read_model_file(path):
    with open(path, encoding="utf-8") as handle:
        return read_model(handle.read())
