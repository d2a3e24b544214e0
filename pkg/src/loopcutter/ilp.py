"""Integer program for green-field design, its export, and an exhaustive
solver for tiny instances

The program is held as plain rows so it can be checked against a design
without a solver; `to_pulp` turns it into a `pulp.LpProblem` for export or for
an external MILP solver.

Naming scheme (node ids reduced to ``[A-Za-z0-9_]``):

* variables ``c_<x>_<y>_<i>`` copper for customer i on arc x->y (binary),
  ``n_<x>_<y>`` fiber strands on arc x->y (integer), ``T_<a>_<b>`` trench on
  edge a-b (binary), ``d_<i>`` units at i (integer)
* rows ``flowC_<x>_<i>``, ``flowF_<x>``, ``fiberbal_<i>``, ``cap_<i>``,
  ``officeCout``, ``officeCin``, ``officeFin``, ``officeFout``,
  ``demand_<i>``, ``noout_<i>``, ``transit_<i>_<j>``, ``trench_<a>_<b>_<i>``,
  ``looplen_<i>``
"""

from __future__ import annotations

import itertools
import logging
import math
import re
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Mapping

import networkx as nx
import pulp

from loopcutter.exceptions import (
    LCInfeasibleError,
    LCInvalidArgumentError,
    LCLimitError,
)
from loopcutter.metrics import cost_breakdown
from loopcutter.model import (
    AccessGraph,
    Assignment,
    CostBreakdown,
    CostParams,
    DesignSolution,
    NodeKind,
    PowerModel,
    Scenario,
    Violation,
    energy_to_money,
    exceeds_reach,
    validate_graph,
    validate_power_model,
)
from loopcutter.util import edge_key

logger = logging.getLogger(__name__)

type Sense = Literal["==", "<=", ">="]
type VariableFamily = Literal["copper", "fiber", "trench", "units"]

FAMILIES = (
    "flowC",
    "flowF",
    "fiberbal",
    "cap",
    "office",
    "demand",
    "noout",
    "transit",
    "trench",
    "looplen",
)


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    family: VariableFamily

    @property
    def binary(self) -> bool:
        return self.family in ("copper", "trench")


@dataclass(frozen=True, slots=True)
class Row:
    """A named linear constraint `sum(coeffs * x) <sense> rhs`"""

    name: str
    family: str
    coeffs: Mapping[str, float]
    sense: Sense
    rhs: float

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(coef * values.get(name, 0.0) for name, coef in self.coeffs.items())

    def satisfied(self, values: Mapping[str, float], tol: float = 1e-6) -> bool:
        lhs = self.activity(values)
        if self.sense == "==":
            return abs(lhs - self.rhs) <= tol
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        return lhs >= self.rhs - tol


@dataclass(frozen=True, slots=True)
class IlpModel:
    """The integer program of one street graph

    Attributes:
        variables: Every variable by name, in creation order
        objective: Objective coefficients; zero coefficients are omitted
        rows: Constraints grouped by family, in family order
        node_names: Node id -> identifier used inside names
        office_units: Whether the office may host units
        trivially_infeasible: There are customers but nowhere to put a unit
    """

    name: str
    variables: Mapping[str, Variable]
    objective: Mapping[str, float]
    rows: tuple[Row, ...]
    node_names: Mapping[str, str]
    office_units: bool = False
    trivially_infeasible: bool = False

    def variable_counts(self) -> dict[str, int]:
        counts: dict[str, int] = defaultdict(int)
        for var in self.variables.values():
            counts[var.family] += 1
        return dict(counts)

    def family_counts(self) -> dict[str, int]:
        counts = {family: 0 for family in FAMILIES}
        for row in self.rows:
            counts[row.family] += 1
        return counts

    def row(self, name: str) -> Row:
        for row in self.rows:
            if row.name == name:
                return row
        raise LCInvalidArgumentError(f"no row named {name!r}")

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(coef * values.get(name, 0.0) for name, coef in self.objective.items())

    def to_pulp(self) -> pulp.LpProblem:
        """Builds the equivalent `pulp.LpProblem`"""
        problem = pulp.LpProblem(self.name, pulp.LpMinimize)
        lp_vars = {
            name: pulp.LpVariable(
                name, lowBound=0, cat=pulp.LpBinary if var.binary else pulp.LpInteger
            )
            for name, var in self.variables.items()
        }
        problem.setObjective(
            pulp.LpAffineExpression([(lp_vars[n], c) for n, c in self.objective.items()])
        )
        senses = {
            "==": pulp.LpConstraintEQ,
            "<=": pulp.LpConstraintLE,
            ">=": pulp.LpConstraintGE,
        }
        for row in self.rows:
            expr = pulp.LpAffineExpression([(lp_vars[n], c) for n, c in row.coeffs.items()])
            problem.addConstraint(
                pulp.LpConstraint(expr, senses[row.sense], row.name, row.rhs), row.name
            )
        return problem


def _ident(node: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", node)


class _Builder:
    __slots__ = ("variables", "objective", "rows", "_names")

    def __init__(self) -> None:
        self.variables: dict[str, Variable] = {}
        self.objective: dict[str, float] = {}
        self.rows: list[Row] = []
        self._names: set[str] = set()

    def _claim(self, name: str) -> None:
        if name in self._names:
            raise LCInvalidArgumentError(f"node ids collide in name {name!r}")
        self._names.add(name)

    def var(self, name: str, family: VariableFamily, cost: float) -> str:
        self._claim(name)
        self.variables[name] = Variable(name, family)
        if cost:
            self.objective[name] = cost
        return name

    def row(
        self,
        name: str,
        family: str,
        terms: list[tuple[str, float]],
        sense: Sense,
        rhs: float = 0.0,
    ) -> None:
        self._claim(name)
        coeffs: dict[str, float] = {}
        for var, coef in terms:
            coeffs[var] = coeffs.get(var, 0.0) + coef
        self.rows.append(Row(name, family, coeffs, sense, rhs))


def build_ilp(
    g: AccessGraph, pm: PowerModel, p: CostParams, office_units: bool = False
) -> IlpModel:
    """Builds the integer program of a street graph

    Power is additive: each arc costs the model's average slope times its
    length. Fiber is charged per strand.

    Args:
        g: The street graph
        pm: The power model
        p: Cost parameters
        office_units: Let the office host units like a candidate. Without it
            no copper may touch the office.

    Raises:
        LCValidationError: The graph or power model is invalid
        LCInvalidArgumentError: Two node ids map to the same name
    """
    validate_graph(g).raise_if_invalid()
    validate_power_model(pm).raise_if_invalid()

    office = g.office
    customers = g.customers
    candidates = g.candidates
    plain = [n for n in g.nodes if g.node(n).kind is NodeKind.JUNCTION]
    names = {node: _ident(node) for node in g.nodes}
    if len(set(names.values())) != len(names):
        raise LCInvalidArgumentError("node ids collide after name sanitising")
    slope = pm.average_slope
    b = _Builder()

    arcs: list[tuple[str, str]] = []
    for edge in g.edges:
        arcs.extend([(edge.u, edge.v), (edge.v, edge.u)])
    out_arcs: dict[str, list[tuple[str, str]]] = defaultdict(list)
    in_arcs: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for x, y in arcs:
        out_arcs[x].append((x, y))
        in_arcs[y].append((x, y))

    def cvar(x: str, y: str, i: str) -> str:
        return f"c_{names[x]}_{names[y]}_{names[i]}"

    def nvar(x: str, y: str) -> str:
        return f"n_{names[x]}_{names[y]}"

    def tvar(x: str, y: str) -> str:
        a, c = edge_key(x, y)
        return f"T_{names[a]}_{names[c]}"

    for x, y in arcs:
        costs = g.edge_costs(x, y)
        copper = energy_to_money(slope * costs.length_m, p) + costs.copper_install
        for i in customers:
            b.var(cvar(x, y, i), "copper", copper)
    for x, y in arcs:
        b.var(nvar(x, y), "fiber", g.edge_costs(x, y).fiber_install)
    for edge in g.edges:
        b.var(tvar(edge.u, edge.v), "trench", edge.costs.dig)
    hosts = list(candidates) + ([office] if office_units else [])
    for i in hosts:
        b.var(f"d_{names[i]}", "units", p.rem_cost)

    def net_copper(x: str, i: str) -> list[tuple[str, float]]:
        return [(cvar(*a, i), 1.0) for a in out_arcs[x]] + [
            (cvar(*a, i), -1.0) for a in in_arcs[x]
        ]

    def net_fiber(x: str) -> list[tuple[str, float]]:
        return [(nvar(*a), 1.0) for a in out_arcs[x]] + [
            (nvar(*a), -1.0) for a in in_arcs[x]
        ]

    for x in plain:
        for i in customers:
            b.row(f"flowC_{names[x]}_{names[i]}", "flowC", net_copper(x, i), "==")
    for x in plain + list(customers):
        b.row(f"flowF_{names[x]}", "flowF", net_fiber(x), "==")
    for i in candidates:
        terms = [(t, -c) for t, c in net_fiber(i)] + [(f"d_{names[i]}", -1.0)]
        b.row(f"fiberbal_{names[i]}", "fiberbal", terms, "==")
    for i in candidates:
        terms = [t for k in customers for t in net_copper(i, k)]
        terms.append((f"d_{names[i]}", -float(p.capacity)))
        b.row(f"cap_{names[i]}", "cap", terms, "<=")

    copper_out = [(cvar(*a, i), 1.0) for i in customers for a in out_arcs[office]]
    copper_in = [(cvar(*a, i), 1.0) for i in customers for a in in_arcs[office]]
    if office_units:
        terms = [t for k in customers for t in net_copper(office, k)]
        terms.append((f"d_{names[office]}", -float(p.capacity)))
        b.row(f"cap_{names[office]}", "office", terms, "<=")
    else:
        b.row("officeCout", "office", copper_out, "==")
    b.row("officeCin", "office", copper_in, "==")
    b.row("officeFin", "office", [(nvar(*a), 1.0) for a in in_arcs[office]], "==")
    fiber_out = [(nvar(*a), 1.0) for a in out_arcs[office]]
    fiber_out += [(f"d_{names[i]}", -1.0) for i in candidates]
    b.row("officeFout", "office", fiber_out, "==")

    for i in customers:
        b.row(
            f"demand_{names[i]}",
            "demand",
            [(cvar(*a, i), 1.0) for a in in_arcs[i]],
            "==",
            1.0,
        )
        b.row(
            f"noout_{names[i]}", "noout", [(cvar(*a, i), 1.0) for a in out_arcs[i]], "=="
        )
    for i in customers:
        for j in customers:
            if i != j:
                b.row(f"transit_{names[i]}_{names[j]}", "transit", net_copper(i, j), "==")

    big_m = float(len(candidates) + len(customers))
    for edge in g.edges:
        u, v = edge_key(edge.u, edge.v)
        shared = [(nvar(u, v), 1.0), (nvar(v, u), 1.0), (tvar(u, v), -big_m)]
        if not customers:
            b.row(f"trench_{names[u]}_{names[v]}", "trench", shared, "<=")
        for i in customers:
            terms = [(cvar(u, v, i), 1.0), (cvar(v, u, i), 1.0), *shared]
            b.row(f"trench_{names[u]}_{names[v]}_{names[i]}", "trench", terms, "<=")
    for i in customers:
        terms = [(cvar(x, y, i), g.edge_costs(x, y).length_m) for x, y in arcs]
        b.row(f"looplen_{names[i]}", "looplen", terms, "<=", pm.max_loop_m)

    trivial = bool(customers) and not hosts
    if trivial:
        logger.warning("no candidate nodes: the program is infeasible")
    model = IlpModel(
        name="loopcutter",
        variables=b.variables,
        objective=b.objective,
        rows=tuple(b.rows),
        node_names=names,
        office_units=office_units,
        trivially_infeasible=trivial,
    )
    logger.debug("ilp: %d variables, %d rows", len(model.variables), len(model.rows))
    return model


def _write(problem: pulp.LpProblem, suffix: str) -> str:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / f"model{suffix}"
        if suffix == ".lp":
            problem.writeLP(str(path))
        else:
            problem.writeMPS(str(path))
        return path.read_text(encoding="utf-8")


def export_lp(m: IlpModel) -> str:
    """The model in CPLEX LP format; identical models give identical text"""
    return _write(m.to_pulp(), ".lp")


def export_mps(m: IlpModel) -> str:
    """The model in MPS format, with the same names as `export_lp`"""
    return _write(m.to_pulp(), ".mps")


@dataclass(frozen=True, slots=True)
class IlpSolution:
    """Values of every model variable, the objective, and any broken rows"""

    values: Mapping[str, float]
    objective: float
    violations: tuple[Violation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations


def evaluate_solution(
    g: AccessGraph, pm: PowerModel, p: CostParams, s: DesignSolution
) -> tuple[IlpSolution, CostBreakdown]:
    """Maps a design onto the program's variables and checks every row

    The office may host units. Trench variables are set on the design's
    trench edges and on every edge a loop or a fiber uses. The returned
    breakdown is computed in greenfield accounting with additive power and
    per-strand fiber, so its total equals the objective.

    Raises:
        LCInvalidArgumentError: The design refers to nodes or edges not in `g`
    """
    model = build_ilp(g, pm, p, office_units=True)
    names = model.node_names
    values = {name: 0.0 for name in model.variables}
    violations: list[Violation] = []

    def bump(name: str, amount: float) -> None:
        if name not in values:
            raise LCInvalidArgumentError(f"design uses {name!r}, which is not in the graph")
        values[name] += amount

    used: set[tuple[str, str]] = set(s.trench_edges)
    for a in s.assignments:
        if any(node not in names for node in (a.customer, *a.path)):
            raise LCInvalidArgumentError(f"loop of {a.customer!r} leaves the graph")
        for x, y in a.path_edges():
            bump(f"c_{names[x]}_{names[y]}_{names[a.customer]}", 1.0)
            used.add(edge_key(x, y))

    lit = nx.Graph()
    lit.add_node(g.office)
    lit.add_edges_from(k for k, strands in s.fiber_edges.items() if strands > 0)
    depth = nx.single_source_shortest_path_length(lit, g.office)
    for (u, v), strands in s.fiber_edges.items():
        if strands <= 0:
            continue
        if u not in names or v not in names:
            raise LCInvalidArgumentError(f"unknown fiber edge {u}-{v}")
        if depth.get(v, math.inf) < depth.get(u, math.inf):
            u, v = v, u
        bump(f"n_{names[u]}_{names[v]}", float(strands))
        used.add(edge_key(u, v))

    for u, v in sorted(used):
        if u not in names or v not in names:
            raise LCInvalidArgumentError(f"unknown edge {u}-{v}")
        bump(f"T_{names[u]}_{names[v]}", 1.0)
    for node, units in s.placements.items():
        name = f"d_{names.get(node, _ident(node))}"
        if name not in values:
            violations.append(Violation("units", node, "node cannot host units"))
            continue
        values[name] += units

    for name, var in model.variables.items():
        if var.binary and values[name] not in (0.0, 1.0):
            violations.append(Violation("binary", name, f"value {values[name]}"))
    for row in model.rows:
        if not row.satisfied(values):
            violations.append(
                Violation(row.family, row.name, f"activity {row.activity(values)}")
            )

    solution = IlpSolution(values, model.objective_value(values), tuple(violations))
    breakdown = cost_breakdown(
        s.replace(scenario=Scenario.GREENFIELD, trench_edges=tuple(sorted(used))),
        g,
        pm,
        p.for_ilp(),
    )
    return solution, breakdown


@dataclass(frozen=True, slots=True)
class SmallLimits:
    """Size guards of `exact_solve_small`"""

    max_edges: int = 14
    max_customers: int = 4
    max_candidates: int = 3
    max_units_per_node: int = 2


@dataclass(frozen=True, slots=True)
class _Route:
    cost: float
    length: float
    path: tuple[str, ...]


def _route_cost(sub: nx.Graph, path: list[str], p: CostParams, slope: float) -> _Route:
    length = copper = 0.0
    for x, y in zip(path, path[1:]):
        costs = sub.edges[x, y]["costs"]
        length += costs.length_m
        copper += costs.copper_install
    return _Route(copper + energy_to_money(slope * length, p), length, tuple(path))


def _best_route(
    sub: nx.Graph, host: str, customer: str, pm: PowerModel, p: CostParams
) -> _Route | None:
    slope = pm.average_slope

    def weight(u: str, v: str, data: dict) -> float:
        costs = data["costs"]
        return costs.copper_install + energy_to_money(slope * costs.length_m, p)

    try:
        path = nx.dijkstra_path(sub, host, customer, weight=weight)
    except nx.NetworkXNoPath:
        return None
    route = _route_cost(sub, path, p, slope)
    if not exceeds_reach(pm, route.length):
        return route
    best = None
    for path in nx.all_simple_paths(sub, host, customer):
        candidate = _route_cost(sub, path, p, slope)
        if exceeds_reach(pm, candidate.length):
            continue
        if best is None or candidate.cost < best.cost:
            best = candidate
    return best


def exact_solve_small(
    g: AccessGraph,
    pm: PowerModel,
    p: CostParams,
    limits: SmallLimits = SmallLimits(),
) -> DesignSolution:
    """Optimal green-field design of a tiny graph by enumeration

    Every trench subset that connects the office to all customers is tried in
    order of dig cost, and within it every assignment of customers to the
    office or a candidate. Loops follow their cheapest trenched route within
    the reach and fiber the cheapest trenched route to each unit. Power is
    additive and fiber is charged per strand, so the result is the program's
    optimum with units allowed at the office.

    Raises:
        LCLimitError: The graph exceeds `limits`
        LCInfeasibleError: No design is feasible
    """
    validate_graph(g).raise_if_invalid()
    validate_power_model(pm).raise_if_invalid()
    customers, candidates = g.customers, g.candidates
    if (
        len(g.edges) > limits.max_edges
        or len(customers) > limits.max_customers
        or len(candidates) > limits.max_candidates
        or -(-len(customers) // p.capacity) > limits.max_units_per_node
    ):
        raise LCLimitError("instance exceeds the exhaustive solver limits")

    q = p.for_ilp()
    office = g.office
    hosts = [office, *candidates]
    keep = set(customers) | set(hosts)
    edges = list(g.edges)
    subsets = []
    for size in range(len(edges) + 1):
        for combo in itertools.combinations(range(len(edges)), size):
            subsets.append((sum(edges[k].costs.dig for k in combo), combo))
    subsets.sort()
    floor_units = -(-len(customers) // p.capacity) * p.rem_cost

    best_cost = math.inf
    best: tuple | None = None
    scanned = 0
    for dig, combo in subsets:
        if dig + floor_units >= best_cost:
            break
        sub = nx.Graph()
        sub.add_node(office)
        for k in combo:
            e = edges[k]
            sub.add_edge(e.u, e.v, costs=e.costs)
        if not nx.is_connected(sub):
            continue
        if any(c not in sub for c in customers):
            continue
        if any(sub.degree(n) == 1 and n not in keep for n in sub):
            continue
        scanned += 1

        fiber_paths = {}
        for h in hosts:
            if h in sub:
                dist, path = nx.single_source_dijkstra(
                    sub, office, h, weight=lambda u, v, d: d["costs"].fiber_install
                )
                fiber_paths[h] = (dist, path)
        choices = []
        for c in customers:
            options = []
            for h in hosts:
                if h in fiber_paths and (route := _best_route(sub, h, c, pm, q)):
                    options.append((h, route))
            if not options:
                break
            choices.append(options)
        else:
            for assignment in itertools.product(*choices):
                load: dict[str, int] = defaultdict(int)
                for h, _ in assignment:
                    load[h] += 1
                units = {h: -(-n // p.capacity) for h, n in load.items()}
                cost = dig + sum(r.cost for _, r in assignment)
                cost += sum(
                    n * (p.rem_cost + fiber_paths[h][0]) for h, n in units.items()
                )
                if cost < best_cost:
                    best_cost = cost
                    best = (combo, assignment, units, fiber_paths)
    logger.debug("exact: %d trench subsets evaluated", scanned)

    if best is None:
        raise LCInfeasibleError(customers, "no trench set serves every customer")
    combo, assignment, units, fiber_paths = best
    strands: dict[tuple[str, str], int] = defaultdict(int)
    for h, n in units.items():
        path = fiber_paths[h][1]
        for x, y in zip(path, path[1:]):
            strands[edge_key(x, y)] += n
    solution = DesignSolution(
        placements=dict(sorted(units.items())),
        assignments=tuple(
            Assignment(c, h, r.length, r.path) for c, (h, r) in zip(customers, assignment)
        ),
        fiber_edges=dict(sorted(strands.items())),
        breakdown=CostBreakdown(),
        scenario=Scenario.GREENFIELD,
        trench_edges=tuple(sorted(edges[k].key for k in combo)),
        method="exact",
    )
    return solution.replace(breakdown=cost_breakdown(solution, g, pm, q))
