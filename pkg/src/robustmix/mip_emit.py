"""Emission of the dualized mixture models as CPLEX-LP files.

Budgeted components are dualized with threshold/overflow variables,
hull components get one epigraph variable and one row per point,
polyhedral components are dualized with one multiplier per row, and
interval components fold into the linear objective.  Ellipsoids are
conic and rejected.  Variable naming is stable for diffing:
x_<i>, pi_<j>, rho_<j>_<i>, alpha_<j>_<r>, y_<j> with j the mixture
component index.

Objective constants would be carried by a variable `one` fixed to
[1, 1]; none of the emitted models need one before solving, but the
parser understands it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedError
from .instances import Instance, Solution
from .uncertainty import (
    BudgetedSet,
    EllipsoidSet,
    HullSet,
    IntervalSet,
    Mixture,
    PolyhedronSet,
)

_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class ModelStats:
    num_binary: int
    num_continuous: int
    num_constraints: int
    objective_constant: float = 0.0


def expected_stats(inst: Instance, mix: Mixture) -> ModelStats:
    """Closed-form variable and row counts for the combined model."""
    n = inst.n
    cont = 0
    rows = 0
    for _, uset in mix.components:
        if isinstance(uset, BudgetedSet):
            cont += 1 + n
            rows += n
        elif isinstance(uset, HullSet):
            cont += 1
            rows += uset.num_points
        elif isinstance(uset, PolyhedronSet):
            cont += uset.V.shape[0]
            rows += n
        elif isinstance(uset, EllipsoidSet):
            raise UnsupportedError("conic objective unsupported in LP format")
    rows += 1 if inst.kind == "selection" else inst.graph.num_nodes
    return ModelStats(n, cont, rows)


def _coef(v: float) -> str:
    return f"{v:.12g}"


def _expr(terms: list[tuple[float, str]]) -> str:
    parts = []
    for coef, name in terms:
        if not parts:
            parts.append(f"{_coef(coef)} {name}")
        elif coef < 0:
            parts.append(f"- {_coef(-coef)} {name}")
        else:
            parts.append(f"+ {_coef(coef)} {name}")
    return " ".join(parts) if parts else "0 one"


def emit_model(inst: Instance, mix: Mixture, out_path: str) -> ModelStats:
    """Write the weighted model as an LP file; returns exact counts."""
    stats = expected_stats(inst, mix)
    n = inst.n

    obj_x = np.zeros(n)
    obj_terms: list[tuple[float, str]] = []
    rows: list[tuple[str, list[tuple[float, str]], str, float]] = []
    cont_vars: list[str] = []

    for j, (weight, uset) in enumerate(mix.components):
        if isinstance(uset, IntervalSet):
            obj_x += weight * uset.hi
        elif isinstance(uset, BudgetedSet):
            obj_x += weight * uset.lo
            pi = f"pi_{j}"
            cont_vars.append(pi)
            obj_terms.append((weight * uset.gamma, pi))
            for i in range(n):
                rho = f"rho_{j}_{i}"
                cont_vars.append(rho)
                obj_terms.append((weight, rho))
                rows.append(
                    (
                        f"bud_{j}_{i}",
                        [(1.0, pi), (1.0, rho), (-float(uset.deviations[i]), f"x_{i}")],
                        ">=",
                        0.0,
                    )
                )
        elif isinstance(uset, HullSet):
            y = f"y_{j}"
            cont_vars.append(y)
            obj_terms.append((weight, y))
            for k in range(uset.num_points):
                terms = [(1.0, y)]
                for i in range(n):
                    coef = float(uset.points[k, i])
                    if coef != 0.0:
                        terms.append((-coef, f"x_{i}"))
                rows.append((f"hull_{j}_{k}", terms, ">=", 0.0))
        elif isinstance(uset, PolyhedronSet):
            m = uset.V.shape[0]
            alphas = [f"alpha_{j}_{r}" for r in range(m)]
            cont_vars.extend(alphas)
            for r in range(m):
                obj_terms.append((weight * float(uset.d[r]), alphas[r]))
            for i in range(n):
                terms = []
                for r in range(m):
                    coef = float(uset.V[r, i])
                    if coef != 0.0:
                        terms.append((coef, alphas[r]))
                terms.append((-1.0, f"x_{i}"))
                rows.append((f"poly_{j}_{i}", terms, ">=", 0.0))
        else:
            raise UnsupportedError("conic objective unsupported in LP format")

    x_terms = [(float(obj_x[i]), f"x_{i}") for i in range(n) if obj_x[i] != 0.0]
    objective = x_terms + obj_terms
    if not objective:
        objective = [(0.0, "x_0")]

    if inst.kind == "selection":
        rows.append(
            ("card", [(1.0, f"x_{i}") for i in range(n)], "=", float(inst.p))
        )
    else:
        g = inst.graph
        for v in range(g.num_nodes):
            terms: list[tuple[float, str]] = []
            for i, (tail, head) in enumerate(g.arcs):
                if tail == v:
                    terms.append((1.0, f"x_{i}"))
                if head == v:
                    terms.append((-1.0, f"x_{i}"))
            rhs = 1.0 if v == inst.source else (-1.0 if v == inst.target else 0.0)
            if not terms:
                terms = [(0.0, "x_0")]
            rows.append((f"flow_{v}", terms, "=", rhs))

    lines = ["\\ robustmix weighted model", "Minimize", f" obj: {_expr(objective)}"]
    lines.append("Subject To")
    for name, terms, sense, rhs in rows:
        lines.append(f" {name}: {_expr(terms)} {sense} {_coef(rhs)}")
    lines.append("Bounds")
    for i in range(n):
        lines.append(f" 0 <= x_{i} <= 1")
    for var in cont_vars:
        lines.append(f" {var} >= 0")
    lines.append("General")
    for i in range(n):
        lines.append(f" x_{i}")
    lines.append("End")

    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return stats


@dataclass
class LpModel:
    objective: dict[str, float]
    constraints: list[tuple[str, dict[str, float], str, float]]
    bounds: dict[str, tuple[float, float]]
    general: set[str]


def _parse_terms(tokens: list[str]) -> dict[str, float]:
    terms: dict[str, float] = {}
    sign = 1.0
    coef: float | None = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
            continue
        if tok == "-":
            sign = -1.0
            continue
        try:
            value = float(tok)
        except ValueError:
            value = None
        if value is not None:
            if coef is not None:
                raise ParseError(f"two consecutive numbers near {tok!r}")
            coef = value
            continue
        if not _NAME.match(tok):
            raise ParseError(f"bad variable name {tok!r}")
        terms[tok] = terms.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
        sign, coef = 1.0, None
    if coef is not None:
        raise ParseError("dangling coefficient in expression")
    return terms


def parse_lp(text: str) -> LpModel:
    """Strict parser for the subset of LP format this package emits."""
    lines = [
        ln.strip()
        for ln in text.splitlines()
        if ln.strip() and not ln.strip().startswith("\\")
    ]
    section = None
    objective: dict[str, float] = {}
    constraints: list[tuple[str, dict[str, float], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    general: set[str] = set()
    seen_sections = []

    for ln in lines:
        low = ln.lower()
        if low in ("minimize", "subject to", "bounds", "general", "end"):
            section = low
            seen_sections.append(low)
            continue
        if section == "minimize":
            if ":" not in ln:
                raise ParseError("objective line missing label")
            _, expr = ln.split(":", 1)
            objective = _parse_terms(expr.split())
        elif section == "subject to":
            if ":" not in ln:
                raise ParseError(f"constraint missing label: {ln!r}")
            name, rest = ln.split(":", 1)
            name = name.strip()
            if not _NAME.match(name):
                raise ParseError(f"bad constraint name {name!r}")
            tokens = rest.split()
            sense_idx = None
            for i, tok in enumerate(tokens):
                if tok in (">=", "<=", "="):
                    sense_idx = i
                    break
            if sense_idx is None or sense_idx != len(tokens) - 2:
                raise ParseError(f"constraint needs '<terms> <sense> <rhs>': {ln!r}")
            terms = _parse_terms(tokens[:sense_idx])
            sense = tokens[sense_idx]
            try:
                rhs = float(tokens[-1])
            except ValueError:
                raise ParseError(f"bad rhs in {ln!r}") from None
            constraints.append((name, terms, sense, rhs))
        elif section == "bounds":
            tokens = ln.split()
            if len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                bounds[tokens[2]] = (float(tokens[0]), float(tokens[4]))
            elif len(tokens) == 3 and tokens[1] == ">=":
                bounds[tokens[0]] = (float(tokens[2]), float("inf"))
            elif len(tokens) == 3 and tokens[1] == "=":
                v = float(tokens[2])
                bounds[tokens[0]] = (v, v)
            else:
                raise ParseError(f"bad bounds line {ln!r}")
        elif section == "general":
            if not _NAME.match(ln):
                raise ParseError(f"bad general entry {ln!r}")
            general.add(ln)
        elif section == "end":
            raise ParseError("content after End")
        else:
            raise ParseError(f"content before Minimize: {ln!r}")

    if seen_sections != ["minimize", "subject to", "bounds", "general", "end"]:
        raise ParseError(f"bad section layout {seen_sections}")
    return LpModel(objective, constraints, bounds, general)


@dataclass
class EmitCheck:
    ok: bool
    objective_match: bool
    message: str = ""


def check_emitted(
    inst: Instance, mix: Mixture, solution: Solution, path: str
) -> EmitCheck:
    """Round-trip validation of an emitted model without an external solver.

    Re-parses the file, fixes x to the given solution, completes the
    continuous variables in closed form (duals for budgeted rows,
    row-max for epigraph rows), checks constraint feasibility, and
    compares the file objective against the in-process objective.
    """
    from .analysis import dual_certificate
    from .solvers import evaluate_wrp

    try:
        with open(path, encoding="utf-8") as fh:
            model = parse_lp(fh.read())
    except ParseError as exc:
        return EmitCheck(False, False, f"parse-back failure: {exc}")

    stats = expected_stats(inst, mix)
    n_rows = len(model.constraints)
    n_bin = len(model.general)
    n_cont = len(model.bounds) - n_bin
    if (n_bin, n_cont, n_rows) != (
        stats.num_binary,
        stats.num_continuous,
        stats.num_constraints,
    ):
        return EmitCheck(
            False,
            False,
            f"structure mismatch: file has {n_bin}/{n_cont}/{n_rows}, "
            f"expected {stats.num_binary}/{stats.num_continuous}/"
            f"{stats.num_constraints}",
        )

    point = {f"x_{i}": float(xi) for i, xi in enumerate(solution.x)}
    for j, (weight, uset) in enumerate(mix.components):
        if isinstance(uset, BudgetedSet):
            cert = dual_certificate(
                Mixture(((1.0, uset),)), solution.x
            )
            point[f"pi_{j}"] = cert.pi[0]
            for i, rho in enumerate(cert.rho[0]):
                point[f"rho_{j}_{i}"] = rho
        elif isinstance(uset, HullSet):
            best = 0.0
            for name, terms, sense, rhs in model.constraints:
                if name.startswith(f"hull_{j}_"):
                    load = -sum(
                        coef * point.get(var, 0.0)
                        for var, coef in terms.items()
                        if var != f"y_{j}"
                    )
                    best = max(best, load)
            point[f"y_{j}"] = best
        elif isinstance(uset, PolyhedronSet):
            return EmitCheck(
                True, False, "polyhedral completion skipped (needs an LP solver)"
            )

    for name, terms, sense, rhs in model.constraints:
        lhs = sum(coef * point.get(var, 0.0) for var, coef in terms.items())
        sat = {
            ">=": lhs >= rhs - 1e-6,
            "<=": lhs <= rhs + 1e-6,
            "=": abs(lhs - rhs) <= 1e-6,
        }[sense]
        if not sat:
            return EmitCheck(False, False, f"constraint {name} violated at point")

    file_obj = sum(coef * point.get(var, 0.0) for var, coef in model.objective.items())
    true_obj = evaluate_wrp(mix, solution.x)
    match = abs(file_obj - true_obj) <= 1e-6
    msg = "" if match else f"objective {file_obj} != {true_obj}"
    return EmitCheck(True, match, msg)
