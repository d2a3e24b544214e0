"""Placement of remote units on an existing copper tree

The dynamic program runs bottom-up over the tree. For every node it keeps one
`DpCell` per number of copper loops that pass up through the node's parent
edge (and, under a unit budget, per number of units used below). A cell holds
a front of mutually non-dominated partial designs, so the result is exact even
though the choice of loops sent upward changes the cost paid further up. The
front can be truncated with `DpOptions.front_limit` to trade exactness for
speed; a limit of 1 gives the classic single-value cost array. Trees with more
than `EXACT_CUSTOMER_LIMIT` customers get that limit unless told otherwise.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Literal, Mapping

from loopcutter.exceptions import (
    LCInfeasibleError,
    LCInvalidArgumentError,
    LCInvalidStateError,
    LCLimitError,
)
from loopcutter.metrics import cost_breakdown
from loopcutter.model import (
    AccessTree,
    Assignment,
    CostBreakdown,
    CostParams,
    DesignSolution,
    FiberMode,
    PowerModel,
    Scenario,
    effective_power_model,
    energy_to_money,
    exceeds_reach,
    power_of_loop,
    validate_power_model,
)
from loopcutter.util import edge_key, validate_amount, validate_count

logger = logging.getLogger(__name__)

type Loop = tuple[float, str]
"""A copper loop as (meters from the current node, customer id)"""

type CellKey = tuple[int, int]
"""(loops passing up, units below); units are always 0 without a budget"""

EXACT_CUSTOMER_LIMIT = 64
AUTO_FRONT_LIMIT = 1


@dataclass(frozen=True, slots=True)
class DpOptions:
    """Tuning knobs of the dynamic program

    Attributes:
        front_limit: Keep at most this many cheapest entries per cell, plus the
            one with the shortest longest loop. None keeps full fronts (exact).
        lean: Release pass-through loops once the parent node is solved.
        max_units: Unit budget; None means unbudgeted.
        scenario: REDESIGN or GREENFIELD cost accounting.
        prepaid_units: Leave unit and fiber costs out of the objective, so a
            budgeted run spends its units purely on lowering power.
        exact_up_to: Full fronts are only kept on trees with at most this many
            customers; larger trees fall back to `AUTO_FRONT_LIMIT` unless
            `front_limit` is set. None keeps full fronts at any size.
    """

    front_limit: int | None = None
    lean: bool = False
    max_units: int | None = None
    scenario: Scenario = Scenario.REDESIGN
    prepaid_units: bool = False
    exact_up_to: int | None = EXACT_CUSTOMER_LIMIT

    def __post_init__(self) -> None:
        if self.front_limit is not None:
            validate_count(self.front_limit, 1)
        if self.max_units is not None:
            validate_count(self.max_units)
        if self.exact_up_to is not None:
            validate_count(self.exact_up_to)

    @property
    def budgeted(self) -> bool:
        return self.max_units is not None

    def for_tree(self, tree: AccessTree) -> DpOptions:
        """The options a run on `tree` actually uses"""
        if self.front_limit is not None or self.exact_up_to is None:
            return self
        customers = tree.customers_below(tree.root)
        if customers <= self.exact_up_to:
            return self
        logger.info(
            "%d customers exceed the exact limit of %d, fronts capped at %d",
            customers,
            self.exact_up_to,
            AUTO_FRONT_LIMIT,
        )
        return replace(self, front_limit=AUTO_FRONT_LIMIT)


@dataclass(frozen=True, slots=True)
class _Split:
    prev: FrontEntry
    child: str
    pick: FrontEntry


@dataclass(frozen=True, slots=True)
class _Close:
    source: FrontEntry
    passing: int


@dataclass(slots=True, eq=False)
class FrontEntry:
    """One partial design of a subtree

    Attributes:
        cost: Money spent inside the subtree and on its parent edge
        units: Remote units placed inside the subtree
        longest: Length of the longest loop in `loops`
        loops: The passing loops, sorted; None once released in lean mode
        link: Backpointer used by extraction
    """

    cost: float
    units: int
    longest: float
    loops: tuple[Loop, ...] | None
    link: _Split | _Close | None = None


@dataclass(slots=True)
class DpCell:
    """The front of partial designs with `c` loops passing up and `units`
    units below"""

    c: int
    units: int
    front: list[FrontEntry] = field(default_factory=list)

    @property
    def best(self) -> FrontEntry:
        return self.front[0]

    @property
    def cost(self) -> float:
        return self.front[0].cost if self.front else math.inf

    @property
    def passthrough(self) -> tuple[float, ...] | None:
        """Loop lengths of the cheapest entry"""
        if not self.front or self.front[0].loops is None:
            return None
        return tuple(length for length, _ in self.front[0].loops)

    @property
    def split(self) -> _Split | _Close | None:
        return self.front[0].link if self.front else None


type CellMap = Mapping[CellKey, DpCell]


@dataclass(slots=True)
class DpTable:
    """Cells of every tree node after a completed run"""

    tree: AccessTree
    pm: PowerModel
    params: CostParams
    options: DpOptions
    cells: dict[str, dict[CellKey, DpCell]]

    def cost_array(self, node: str) -> list[float]:
        """`cost[c]` for c in 0..customers below `node`, minimised over units"""
        costs = [math.inf] * (self.tree.customers_below(node) + 1)
        for (c, _), cell in self.cells[node].items():
            costs[c] = min(costs[c], cell.cost)
        return costs

    def root_entry(self) -> FrontEntry:
        """The cheapest complete design

        Raises:
            LCInvalidStateError: No feasible design exists
        """
        entries = [
            entry
            for (c, _), cell in sorted(self.cells[self.tree.root].items())
            if c == 0
            for entry in cell.front[:1]
        ]
        if not entries:
            raise LCInvalidStateError("the table holds no feasible design")
        return min(entries, key=lambda e: (e.cost, e.units))

    @property
    def feasible(self) -> bool:
        return any(c == 0 and cell.front for (c, _), cell in self.cells[self.tree.root].items())

    @property
    def root_cost(self) -> float:
        return self.root_entry().cost if self.feasible else math.inf


@dataclass(slots=True)
class _Candidate:
    cost: float
    units: int
    longest: float
    make_loops: Callable[[], tuple[Loop, ...]]
    link: _Split | _Close

    def materialize(self) -> FrontEntry:
        return FrontEntry(self.cost, self.units, self.longest, self.make_loops(), self.link)


def _merge_loops(a: FrontEntry, b: FrontEntry) -> tuple[Loop, ...]:
    assert a.loops is not None and b.loops is not None
    return tuple(heapq.merge(a.loops, b.loops))


def _pass_loops(source: FrontEntry, c: int, length: float) -> tuple[Loop, ...]:
    assert source.loops is not None
    return tuple((loop + length, cid) for loop, cid in source.loops[:c])


def _unit_signature(options: DpOptions, p: CostParams) -> Callable[[int], int]:
    # The part of a unit count that still changes costs further up.
    if options.prepaid_units:
        return lambda units: 0
    if p.fiber_mode is FiberMode.PER_STRAND:
        return lambda units: units
    return lambda units: min(units, 1)


def _dominates(a: FrontEntry, b: FrontEntry, signature: Callable[[int], int]) -> bool:
    if a.cost > b.cost or signature(a.units) > signature(b.units):
        return False
    assert a.loops is not None and b.loops is not None
    return all(x[0] <= y[0] for x, y in zip(a.loops, b.loops))


def _select(
    candidates: list[_Candidate],
    options: DpOptions,
    signature: Callable[[int], int],
) -> list[FrontEntry]:
    # Stable sort: ties keep generation order, which prefers smaller j.
    candidates.sort(key=lambda x: (x.cost, x.units, x.longest))
    if options.front_limit is None:
        chosen = candidates
    else:
        chosen = candidates[: options.front_limit]
        guard = min(candidates, key=lambda x: x.longest)
        if all(guard is not x for x in chosen):
            chosen.append(guard)
    front: list[FrontEntry] = []
    for candidate in chosen:
        entry = candidate.materialize()
        if not any(_dominates(kept, entry, signature) for kept in front):
            front.append(entry)
    return front


def _to_cells(
    candidates: dict[CellKey, list[_Candidate]],
    options: DpOptions,
    signature: Callable[[int], int],
) -> dict[CellKey, DpCell]:
    cells = {}
    for key in sorted(candidates):
        front = _select(candidates[key], options, signature)
        if front:
            cells[key] = DpCell(key[0], key[1], front)
    return cells


def _release(cells: CellMap) -> None:
    for cell in cells.values():
        for entry in cell.front:
            entry.loops = None


def combine_subtrees(
    child_cells: Mapping[str, CellMap],
    options: DpOptions = DpOptions(),
    p: CostParams = CostParams(),
) -> dict[CellKey, DpCell]:
    """Min-plus combination of the children of one node

    Args:
        child_cells: Cells of each child in child order, already extended over
            the child's parent edge
        options: DP options; `max_units` bounds the unit dimension
        p: Only the fiber mode is read, to decide front dominance

    Returns:
        For every (c, u), the front of ways to have c loops arrive at the node
        from all children together. With no children this is the single empty
        design at (0, 0).
    """
    signature = _unit_signature(options, p)
    acc: dict[CellKey, DpCell] = {(0, 0): DpCell(0, 0, [FrontEntry(0.0, 0, 0.0, ())])}
    for child, cells in child_cells.items():
        candidates: dict[CellKey, list[_Candidate]] = {}
        for (c1, u1), left in sorted(acc.items()):
            for (c2, u2), right in sorted(cells.items()):
                units = u1 + u2
                if options.budgeted:
                    assert options.max_units is not None
                    if units > options.max_units:
                        continue
                key = (c1 + c2, units)
                bucket = candidates.setdefault(key, [])
                for a in left.front:
                    for b in right.front:
                        bucket.append(
                            _Candidate(
                                a.cost + b.cost,
                                a.units + b.units,
                                max(a.longest, b.longest),
                                partial(_merge_loops, a, b),
                                _Split(a, child, b),
                            )
                        )
        merged = _to_cells(candidates, options, signature)
        if options.lean:
            _release(acc)
        acc = merged
    return acc


def node_cost_array(
    tree: AccessTree,
    node: str,
    children_cells: Mapping[str, CellMap],
    pm: PowerModel,
    p: CostParams,
    options: DpOptions = DpOptions(),
) -> dict[CellKey, DpCell]:
    """Cells of one node, given the cells of its children

    For every number c of loops leaving the node upward, the j - c longest of
    the j loops arriving from the children end at units placed here and the c
    shortest continue over the parent edge. The cell cost adds unit, power,
    fiber and (greenfield) copper charges; loops that would exceed the reach are
    not kept. The root keeps only c = 0 and has no parent edge.

    Args:
        tree: The tree
        node: The node to solve
        children_cells: Cells of each child of `node`
        pm: The power model
        p: Cost parameters
        options: DP options

    Returns:
        The node's cells keyed by (c, units)
    """
    epm = effective_power_model(pm, p)
    signature = _unit_signature(options, p)
    greenfield = options.scenario is Scenario.GREENFIELD
    is_root = node == tree.root
    edge = None if is_root else tree.parent_edge(node)

    if tree.is_customer(node):
        assert edge is not None
        if exceeds_reach(epm, edge.length_m):
            return {}
        cost = edge.copper_install if greenfield else 0.0
        entry = FrontEntry(cost, 0, edge.length_m, ((edge.length_m, node),))
        return {(1, 0): DpCell(1, 0, [entry])}

    combined = combine_subtrees(children_cells, options, p)
    hosts = tree.node(node).hosts_units
    rem_cost = 0.0 if options.prepaid_units else p.rem_cost
    candidates: dict[CellKey, list[_Candidate]] = {}

    for (j, _), cell in sorted(combined.items()):
        for source in cell.front:
            loops = source.loops
            assert loops is not None
            suffix = [0.0] * (j + 1)
            for i in range(j - 1, -1, -1):
                suffix[i] = suffix[i + 1] + power_of_loop(epm, loops[i][0])
            lowest = j if not hosts else 0
            highest = 0 if is_root else j
            for c in range(lowest, highest + 1):
                ending = j - c
                units_here = -(-ending // p.capacity)
                # Units at the office sit outside any budget.
                units = source.units + (0 if is_root else units_here)
                if options.max_units is not None and units > options.max_units:
                    continue
                cost = source.cost + rem_cost * units_here + energy_to_money(suffix[c], p)
                longest = 0.0
                if edge is not None:
                    if c:
                        longest = loops[c - 1][0] + edge.length_m
                        if exceeds_reach(epm, longest):
                            break
                    if greenfield:
                        cost += c * edge.copper_install
                    if units and not options.prepaid_units:
                        strands = units if p.fiber_mode is FiberMode.PER_STRAND else 1
                        cost += strands * edge.fiber_install
                key = (c, units if options.budgeted else 0)
                candidates.setdefault(key, []).append(
                    _Candidate(
                        cost,
                        units,
                        longest,
                        partial(_pass_loops, source, c, edge.length_m if edge else 0.0),
                        _Close(source, c),
                    )
                )

    cells = _to_cells(candidates, options, signature)
    if options.lean:
        _release(combined)
    return cells


def solve_table(
    tree: AccessTree,
    pm: PowerModel,
    p: CostParams,
    options: DpOptions = DpOptions(),
) -> DpTable:
    """Runs the dynamic program over the whole tree

    Raises:
        LCValidationError: `pm` is not monotone and convex
    """
    validate_power_model(pm).raise_if_invalid()
    options = options.for_tree(tree)
    cells: dict[str, dict[CellKey, DpCell]] = {}
    for node in tree.postorder():
        children = {child: cells[child] for child in tree.children(node)}
        cells[node] = node_cost_array(tree, node, children, pm, p, options)
        if options.lean:
            for child_map in children.values():
                _release(child_map)
    logger.debug(
        "solved %d nodes, %d front entries",
        len(cells),
        sum(len(cell.front) for m in cells.values() for cell in m.values()),
    )
    return DpTable(tree, pm, p, options, cells)


def _tree_path(tree: AccessTree, host: str, customer: str) -> tuple[str, ...]:
    path: list[str] = []
    for node in tree.root_path(customer):
        original = tree.original_id(node)
        if not path or path[-1] != original:
            path.append(original)
        if node == host:
            break
    return tuple(reversed(path))


def extract_configuration(table: DpTable) -> DesignSolution:
    """Reconstructs the design behind the cheapest root entry

    A top-down pass reads the loop split chosen at every node, and a bottom-up
    pass replays the arriving loops to decide which unit serves each customer.
    The breakdown is recomputed from the design and must match the table.

    Raises:
        LCInvalidStateError: The table is infeasible, or the recomputed cost
            disagrees with it
    """
    tree, p, options = table.tree, table.params, table.options
    root_entry = table.root_entry()

    chosen: dict[str, FrontEntry] = {tree.root: root_entry}
    passing: dict[str, int] = {}
    for node in reversed(tree.postorder()):
        link = chosen[node].link
        if not isinstance(link, _Close):
            continue
        passing[node] = link.passing
        source = link.source
        while isinstance(source.link, _Split):
            chosen[source.link.child] = source.link.pick
            source = source.link.prev

    passes: dict[str, tuple[Loop, ...]] = {}
    units_at: dict[str, int] = {}
    units_below: dict[str, int] = {}
    served: dict[str, tuple[str, float]] = {}
    for node in tree.postorder():
        children = tree.children(node)
        units_below[node] = sum(units_below[c] for c in children)
        if tree.is_customer(node):
            passes[node] = ((tree.parent_edge(node).length_m, node),)
            continue
        arriving = list(heapq.merge(*(passes[c] for c in children)))
        c = passing[node]
        for length, customer in arriving[c:]:
            served[customer] = (node, length)
        here = -(-(len(arriving) - c) // p.capacity)
        if here:
            units_at[node] = here
            units_below[node] += here
        if node != tree.root:
            extra = tree.parent_edge(node).length_m
            passes[node] = tuple((length + extra, cid) for length, cid in arriving[:c])

    assignments = tuple(
        Assignment(customer, host, length, _tree_path(tree, host, customer))
        for customer in tree.customers
        for host, length in (served[customer],)
    )
    fiber_edges = {
        edge_key(tree.original_id(node), tree.original_id(up)): units_below[node]
        for node in tree.postorder()
        if (up := tree.parent(node)) is not None and units_below[node] > 0
    }
    greenfield = options.scenario is Scenario.GREENFIELD
    trench = tuple(sorted(e.key for e in tree.edges())) if greenfield else ()
    solution = DesignSolution(
        placements=dict(sorted(units_at.items())),
        assignments=assignments,
        fiber_edges=dict(sorted(fiber_edges.items())),
        breakdown=CostBreakdown(),
        scenario=options.scenario,
        trench_edges=trench,
        exact=options.front_limit is None,
        extras={"front_limit": options.front_limit},
    )
    breakdown = cost_breakdown(solution, tree, table.pm, p)
    if options.prepaid_units:
        recomputed = breakdown.power + breakdown.copper_install
    else:
        recomputed = breakdown.total - breakdown.dig
    if not math.isclose(recomputed, root_entry.cost, rel_tol=1e-9, abs_tol=1e-6):
        raise LCInvalidStateError(
            f"extracted design costs {recomputed}, table says {root_entry.cost}"
        )
    return solution.replace(breakdown=breakdown)


def _reach_culprits(tree: AccessTree, pm: PowerModel) -> tuple[str, ...]:
    """Customers whose nearest unit-hosting ancestor is out of reach"""
    culprits = []
    for customer in tree.customers:
        for node in tree.root_path(customer)[1:]:
            if tree.node(node).hosts_units:
                if exceeds_reach(pm, tree.depth(customer) - tree.depth(node)):
                    culprits.append(customer)
                break
    return tuple(culprits)


def _infeasible(
    tree: AccessTree, pm: PowerModel, p: CostParams, options: DpOptions
) -> LCInfeasibleError:
    epm = effective_power_model(pm, p)
    culprits = _reach_culprits(tree, epm)
    if culprits:
        return LCInfeasibleError(culprits, "customers beyond reach of every host")
    if options.budgeted:
        beyond = tuple(c for c in tree.customers if exceeds_reach(epm, tree.depth(c)))
        return LCInfeasibleError(
            beyond, f"a budget of {options.max_units} units cannot reach"
        )
    return LCInfeasibleError((), "no feasible design")


def redesign_tree(
    tree: AccessTree,
    pm: PowerModel,
    p: CostParams,
    options: DpOptions | None = None,
) -> DesignSolution:
    """Finds the cheapest placement of remote units on a copper tree

    Args:
        tree: The existing copper tree
        pm: The power model
        p: Cost parameters
        options: DP options; the defaults give the exact optimum on trees of
            up to `EXACT_CUSTOMER_LIMIT` customers

    Returns:
        The optimal design under the redesign cost model (or the greenfield
        one if `options.scenario` says so)

    Raises:
        LCInfeasibleError: Some customer cannot be served within the reach
        LCValidationError: `pm` is not monotone and convex
    """
    options = options or DpOptions()
    table = solve_table(tree, pm, p, options)
    if not table.feasible:
        raise _infeasible(tree, pm, p, options)
    solution = extract_configuration(table)
    logger.info(
        "redesign: total %.2f, %d units, %d customers",
        solution.total,
        solution.units_used,
        len(solution.assignments),
    )
    return solution.replace(method="dp")


def redesign_tree_budgeted(
    tree: AccessTree,
    pm: PowerModel,
    p: CostParams,
    max_units: int,
    options: DpOptions | None = None,
    objective: Literal["total", "power"] = "total",
) -> DesignSolution:
    """Like `redesign_tree`, using at most `max_units` remote units

    Args:
        tree: The existing copper tree
        pm: The power model
        p: Cost parameters
        max_units: Most units placed away from the office; units at the
            office are not counted
        options: Further DP options
        objective: `total` minimises the full cost. `power` treats the budget as
            already paid for and minimises power (plus greenfield copper); the
            returned breakdown still carries every cost.

    Raises:
        LCInfeasibleError: The budget is too small to reach every customer
    """
    validate_count(max_units)
    if objective not in ("total", "power"):
        raise LCInvalidArgumentError(f"unknown objective {objective!r}")
    options = replace(
        options or DpOptions(), max_units=max_units, prepaid_units=objective == "power"
    )
    return redesign_tree(tree, pm, p, options)


def units_for_budget(budget: float, p: CostParams, quantum: float | None = None) -> int:
    """Converts a money budget into a unit cap

    Args:
        budget: Money available for units and fiber
        p: Supplies `rem_cost`, the default quantum
        quantum: Money per unit of budget

    Raises:
        LCInvalidArgumentError: The quantum is zero
    """
    validate_amount(budget, "budget")
    step = validate_amount(p.rem_cost if quantum is None else quantum, "quantum")
    if step == 0:
        raise LCInvalidArgumentError("a budget quantum must be positive")
    return math.floor(budget / step + 1e-12)


def all_copper_solution(
    tree: AccessTree,
    pm: PowerModel,
    p: CostParams,
    scenario: Scenario = Scenario.REDESIGN,
) -> DesignSolution:
    """The design with units only at the office

    Customers beyond the reach are listed as unserved instead of failing.
    """
    epm = effective_power_model(pm, p)
    served = [c for c in tree.customers if not exceeds_reach(epm, tree.depth(c))]
    unserved = tuple(c for c in tree.customers if exceeds_reach(epm, tree.depth(c)))
    units = -(-len(served) // p.capacity)
    assignments = tuple(
        Assignment(c, tree.root, tree.depth(c), _tree_path(tree, tree.root, c))
        for c in served
    )
    trench = tuple(sorted(e.key for e in tree.edges())) if scenario is Scenario.GREENFIELD else ()
    solution = DesignSolution(
        placements={tree.root: units} if units else {},
        assignments=assignments,
        fiber_edges={},
        breakdown=CostBreakdown(),
        scenario=scenario,
        trench_edges=trench,
        unserved=unserved,
        method="all-copper",
    )
    return solution.replace(breakdown=cost_breakdown(solution, tree, pm, p))


ORACLE_MAX_CUSTOMERS = 8
ORACLE_MAX_ASSIGNMENTS = 200_000


def oracle_redesign(
    tree: AccessTree,
    pm: PowerModel,
    p: CostParams,
    max_units: int | None = None,
    scenario: Scenario = Scenario.REDESIGN,
) -> float:
    """Minimum design cost by exhaustive enumeration

    Every customer is tried with every unit-hosting ancestor within reach;
    units per host are the fewest that carry its customers.

    Returns:
        The minimum total, or `math.inf` if nothing is feasible

    Raises:
        LCLimitError: More than 8 customers, or too many assignments
    """
    customers = tree.customers
    if len(customers) > ORACLE_MAX_CUSTOMERS:
        raise LCLimitError(f"{len(customers)} customers exceed the oracle limit")
    validate_power_model(pm).raise_if_invalid()
    epm = effective_power_model(pm, p)
    greenfield = scenario is Scenario.GREENFIELD

    choices: list[list[tuple[str, float, float]]] = []
    for customer in customers:
        options = []
        length = copper = 0.0
        node = customer
        while (up := tree.parent(node)) is not None:
            edge = tree.parent_edge(node)
            length += edge.length_m
            copper += edge.copper_install
            if exceeds_reach(epm, length):
                break
            if tree.node(up).hosts_units:
                options.append((up, power_of_loop(epm, length), copper if greenfield else 0.0))
            node = up
        if not options:
            return math.inf
        choices.append(options)
    if math.prod(len(c) for c in choices) > ORACLE_MAX_ASSIGNMENTS:
        raise LCLimitError("too many assignments to enumerate")

    host_edges: dict[str, frozenset[str]] = {}
    for host in {h for options in choices for h, _, _ in options}:
        host_edges[host] = frozenset(tree.root_path(host)[:-1])
    per_strand = p.fiber_mode is FiberMode.PER_STRAND

    best = math.inf
    for combo in itertools.product(*choices):
        load: dict[str, int] = {}
        watts = copper = 0.0
        for host, w, cu in combo:
            load[host] = load.get(host, 0) + 1
            watts += w
            copper += cu
        units = {h: -(-n // p.capacity) for h, n in load.items()}
        total_units = sum(units.values())
        remote = total_units - units.get(tree.root, 0)
        if max_units is not None and remote > max_units:
            continue
        if per_strand:
            fiber = sum(
                n * tree.parent_edge(e).fiber_install
                for h, n in units.items()
                for e in host_edges[h]
            )
        else:
            lit = frozenset().union(*(host_edges[h] for h in units))
            fiber = sum(tree.parent_edge(e).fiber_install for e in lit)
        cost = total_units * p.rem_cost + energy_to_money(watts, p) + copper + fiber
        best = min(best, cost)
    if greenfield and math.isfinite(best):
        best += sum(e.costs.dig for e in tree.edges())
    return best
