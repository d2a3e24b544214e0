"""Command-line entry point

Subcommands: ``gen``, ``redesign``, ``greenfield``, ``export-ilp``, ``oracle``
and ``report``. Each writes its outputs plus a ``manifest.json`` into the
output directory, which defaults to ``$LOOPCUTTER_OUT_DIR`` or ``./out``.

Exit status is 0 when a feasible result or a valid export was written, 1 when
the input is invalid or infeasible, and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from loopcutter import datagen
from loopcutter._version import __version__
from loopcutter.dataset import Dataset, load_dataset, save_dataset, save_solution
from loopcutter.exceptions import (
    LCError,
    LCInfeasibleError,
    LCInvalidArgumentError,
    LCLimitError,
    LCNotATreeError,
    LCValidationError,
)
from loopcutter.greenfield import PlanRequest, heuristic_gap, plan_greenfield
from loopcutter.ilp import SmallLimits, build_ilp, exact_solve_small, export_lp, export_mps
from loopcutter.metrics import (
    coverage,
    format_report_table,
    reports_frame,
    solution_row,
    write_report_csv,
)
from loopcutter.model import (
    AccessTree,
    CostParams,
    FiberMode,
    PowerModel,
    shortest_paths,
)
from loopcutter.redesign import (
    EXACT_CUSTOMER_LIMIT,
    DpOptions,
    all_copper_solution,
    redesign_tree,
    redesign_tree_budgeted,
)

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "LOOPCUTTER_OUT_DIR"
HOURS_PER_YEAR = 8760.0


@dataclass(slots=True)
class RunManifest:
    """What a run read, which settings it overrode, and what it wrote"""

    command: str
    inputs: list[str] = field(default_factory=list)
    overrides: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    outputs: list[str] = field(default_factory=list)
    wall_clock_s: float = 0.0

    def write(self, directory: Path) -> Path:
        path = directory / "manifest.json"
        path.write_text(
            json.dumps(dataclasses.asdict(self), indent=2) + "\n", encoding="utf-8"
        )
        return path


def _out_dir(args: argparse.Namespace) -> Path:
    directory = Path(args.out or os.environ.get(OUT_DIR_ENV, "out"))
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _int_range(text: str) -> range:
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from err
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return range(lo, hi + 1)


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from err


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from err


def _cost_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for flag in ("rem_cost", "capacity", "energy_price"):
        if getattr(args, flag, None) is not None:
            overrides[flag] = getattr(args, flag)
    if getattr(args, "years", None) is not None:
        overrides["horizon_hours"] = args.years * HOURS_PER_YEAR
    if getattr(args, "fiber_mode", None) is not None:
        overrides["fiber_mode"] = FiberMode(args.fiber_mode)
    return overrides


def _params(ds: Dataset, args: argparse.Namespace) -> CostParams:
    return ds.params.replace(**_cost_overrides(args))


def _dp_options(args: argparse.Namespace) -> DpOptions:
    exact_up_to = None if args.exact_up_to < 0 else args.exact_up_to
    return DpOptions(front_limit=args.front_limit, lean=args.lean, exact_up_to=exact_up_to)


def _objective(args: argparse.Namespace) -> str:
    if args.objective is not None:
        return args.objective
    return "power" if getattr(args, "sweep_budget", None) is not None else "total"


def _manifest_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides = _cost_overrides(args)
    if "fiber_mode" in overrides:
        overrides["fiber_mode"] = overrides["fiber_mode"].value
    return overrides


def _map(func: Callable[[Any], Any], tasks: Iterable[Any], jobs: int) -> list[Any]:
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, tasks))


def _budget_point(task: tuple) -> dict[str, Any] | None:
    name, tree, pm, p, options, units, objective, copper_coverage = task
    try:
        s = redesign_tree_budgeted(tree, pm, p, units, options, objective)
    except LCInfeasibleError as err:
        logger.warning("budget %d is infeasible: %s", units, err)
        return None
    return solution_row(name, "budget_units", units, s, pm, copper_coverage)


def _growth_rows(
    name: str, parameter: str, value: Any, tree: AccessTree, pm: PowerModel, p: CostParams
) -> list[dict[str, Any]]:
    cov = coverage(tree, pm)
    baseline = all_copper_solution(tree, pm, p)
    rows = [solution_row(name, f"{parameter}:all-copper", value, baseline, pm, cov.fraction)]
    try:
        s = redesign_tree(tree, pm, p)
    except LCInfeasibleError as err:
        logger.warning("%s=%s has no feasible design: %s", parameter, value, err)
    else:
        rows.append(solution_row(name, f"{parameter}:dp", value, s, pm, cov.fraction))
    return rows


def _scale_point(task: tuple) -> list[dict[str, Any]]:
    name, tree, pm, p, factor = task
    return _growth_rows(name, "scale", factor, datagen.scale_edges(tree, factor), pm, p)


def _customer_point(task: tuple) -> list[dict[str, Any]]:
    name, tree, pm, p, count, seed = task
    grown = datagen.scale_customers(tree, count, seed)
    return _growth_rows(name, "customers", count, grown, pm, p)


def _finish(
    manifest: RunManifest, directory: Path, outputs: Sequence[Path], started: float
) -> None:
    manifest.outputs = [str(path) for path in outputs]
    manifest.wall_clock_s = round(time.perf_counter() - started, 3)
    manifest.write(directory)


def _load_tree(path: str) -> tuple[Dataset, AccessTree]:
    ds = load_dataset(path)
    try:
        return ds, ds.tree()
    except LCNotATreeError as err:
        raise LCNotATreeError(
            f"{path} is not a copper tree; plan it with `loopcutter greenfield`"
        ) from err


def cmd_gen(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    directory = _out_dir(args)
    if args.preset:
        spec = datagen.DATASET_PRESETS[args.preset]
    elif args.spec:
        try:
            fields = json.loads(Path(args.spec).read_text(encoding="utf-8"))
            spec = datagen.CitySpec(**fields)
        except (json.JSONDecodeError, TypeError) as err:
            raise LCInvalidArgumentError(f"{args.spec}: bad city spec: {err}") from err
    else:
        if args.km is None or args.nodes is None or args.customers is None:
            args.parser.error("give --preset, --spec, or --km, --nodes and --customers")
        spec = datagen.CitySpec(args.km, args.nodes, args.customers)
    changes = {
        key: getattr(args, key)
        for key in ("seed", "candidate_fraction", "dig_per_m", "copper_per_m", "fiber_per_m")
        if getattr(args, key) is not None
    }
    if args.edges is not None:
        changes["target_edges"] = args.edges
    spec = spec.replace(**changes)

    graph = datagen.generate_city(spec)
    if args.tree:
        tree = datagen.build_copper_tree(graph, spec.seed)
        if args.grow_customers is not None:
            tree = datagen.scale_customers(tree, args.grow_customers, spec.seed)
        if args.scale is not None:
            tree = datagen.scale_edges(tree, args.scale)
        graph = tree.to_graph()
    elif args.scale is not None:
        graph = datagen.scale_edges(graph, args.scale)

    out = directory / f"{args.name}.json"
    save_dataset(Dataset(graph), out)
    print(f"{out}: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    manifest = RunManifest(
        "gen",
        [args.spec] if args.spec else [],
        {**changes, "preset": args.preset, "tree": args.tree, "scale": args.scale},
        spec.seed,
    )
    _finish(manifest, directory, [out], started)
    return 0


def cmd_redesign(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    directory = _out_dir(args)
    ds, tree = _load_tree(args.input)
    p = _params(ds, args)
    pm = ds.power_model
    options = _dp_options(args)
    objective = _objective(args)
    name = Path(args.input).stem
    copper_coverage = coverage(tree, pm).fraction
    outputs: list[Path] = []

    if args.sweep_budget is not None:
        tasks = [
            (name, tree, pm, p, options, units, objective, copper_coverage)
            for units in args.sweep_budget
        ]
        rows = [row for row in _map(_budget_point, tasks, args.jobs) if row is not None]
        if not rows:
            raise LCInfeasibleError(tree.customers, "no budget in the sweep is feasible")
        frame = reports_frame(rows).sort_values("value", kind="stable")
        out = directory / "sweep.csv"
        write_report_csv(frame, out)
        print(format_report_table(frame))
        outputs.append(out)
    else:
        if args.budget_units is None:
            s = redesign_tree(tree, pm, p, options)
            parameter, value = "budget_units", None
        else:
            s = redesign_tree_budgeted(tree, pm, p, args.budget_units, options, objective)
            parameter, value = "budget_units", args.budget_units
        frame = reports_frame([solution_row(name, parameter, value, s, pm, copper_coverage)])
        sol_path, csv_path = directory / "solution.json", directory / "report.csv"
        save_solution(s, sol_path)
        write_report_csv(frame, csv_path)
        print(format_report_table(frame))
        outputs += [sol_path, csv_path]

    manifest = RunManifest(
        "redesign",
        [args.input],
        {
            **_manifest_overrides(args),
            "budget_units": args.budget_units,
            "sweep_budget": (
                None
                if args.sweep_budget is None
                else [args.sweep_budget.start, args.sweep_budget.stop - 1]
            ),
            "objective": objective,
            "front_limit": args.front_limit,
            "exact_up_to": args.exact_up_to,
            "lean": args.lean,
        },
    )
    _finish(manifest, directory, outputs, started)
    return 0


def cmd_greenfield(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    directory = _out_dir(args)
    ds = load_dataset(args.input)
    p = _params(ds, args)
    if args.additive_power:
        p = p.replace(ilp_additive_power=True)
    pm = ds.power_model
    req = PlanRequest(
        ds.graph,
        args.method,
        pm,
        p,
        args.steiner_weight,
        _dp_options(args),
        args.budget_units,
        _objective(args),
    )
    s = plan_greenfield(req)
    if args.exact:
        reference = exact_solve_small(ds.graph, pm, p)
        s = s.replace(
            extras={
                **s.extras,
                "exact_total": reference.total,
                "heuristic_gap": heuristic_gap(s.total, reference.total),
            }
        )
    name = Path(args.input).stem
    frame = reports_frame(
        [solution_row(name, "method", s.method, s, pm, coverage(ds.graph, pm).fraction)]
    )
    sol_path, csv_path = directory / "solution.json", directory / "report.csv"
    save_solution(s, sol_path)
    write_report_csv(frame, csv_path)
    print(format_report_table(frame))
    manifest = RunManifest(
        "greenfield",
        [args.input],
        {
            **_manifest_overrides(args),
            "method": args.method,
            "additive_power": args.additive_power,
            "steiner_weight": args.steiner_weight,
            "budget_units": args.budget_units,
            "exact": args.exact,
        },
    )
    _finish(manifest, directory, [sol_path, csv_path], started)
    return 0


def cmd_export_ilp(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    ds = load_dataset(args.input)
    if ds.graph.is_tree() and not args.allow_tree:
        print(
            f"{args.input} is a copper tree: redesign it with `loopcutter redesign`,"
            " or pass --allow-tree to export it anyway",
            file=sys.stderr,
        )
        return 1
    model = build_ilp(ds.graph, ds.power_model, _params(ds, args), args.office_units)
    suffix = ".mps" if args.mps else ".lp"
    out = Path(args.out) if args.out else _out_dir(args) / f"model{suffix}"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(export_mps(model) if args.mps else export_lp(model), encoding="utf-8")
    counts = model.variable_counts()
    print(f"{out}: {sum(counts.values())} variables, {len(model.rows)} rows")
    manifest = RunManifest(
        "export-ilp",
        [args.input],
        {**_manifest_overrides(args), "mps": args.mps, "office_units": args.office_units},
    )
    _finish(manifest, out.parent, [out], started)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    directory = _out_dir(args)
    ds = load_dataset(args.input)
    limits = SmallLimits(args.max_edges, args.max_customers, args.max_candidates)
    s = exact_solve_small(ds.graph, ds.power_model, _params(ds, args), limits)
    sol_path = directory / "solution.json"
    save_solution(s, sol_path)
    print(f"optimal total {s.total:,.2f} with {s.units_used} units")
    manifest = RunManifest(
        "oracle",
        [args.input],
        {**_manifest_overrides(args), **dataclasses.asdict(limits)},
    )
    _finish(manifest, directory, [sol_path], started)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    directory = _out_dir(args)
    ds, tree = _load_tree(args.input)
    p = _params(ds, args)
    pm = ds.power_model
    name = Path(args.input).stem
    rows: list[dict[str, Any]] = []
    for batch in _map(
        _scale_point, [(name, tree, pm, p, factor) for factor in args.scales], args.jobs
    ):
        rows.extend(batch)
    if args.customers:
        tasks = [(name, tree, pm, p, count, args.seed) for count in args.customers]
        for batch in _map(_customer_point, tasks, args.jobs):
            rows.extend(batch)
    frame = reports_frame(rows)
    out = directory / "report.csv"
    write_report_csv(frame, out)
    print(format_report_table(frame))
    manifest = RunManifest(
        "report",
        [args.input],
        {**_manifest_overrides(args), "scales": args.scales, "customers": args.customers},
        args.seed,
    )
    _finish(manifest, directory, [out], started)
    return 0


def _add_common(parser: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        parser.add_argument("--in", dest="input", required=True, help="dataset JSON file")
    parser.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or ./out)")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def _add_costs(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("cost overrides")
    group.add_argument("--rem-cost", type=float, help="money per remote unit")
    group.add_argument("--capacity", type=int, help="loops per remote unit")
    group.add_argument("--energy-price", type=float, help="money per kWh")
    group.add_argument("--years", type=float, help="energy horizon in years")
    group.add_argument(
        "--fiber-mode", choices=[m.value for m in FiberMode], help="fiber charging"
    )


def _add_dp(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--front-limit", type=int, help="truncate DP fronts (1 = fast)")
    parser.add_argument("--lean", action="store_true", help="release loop lists early")
    parser.add_argument("--budget-units", type=int, help="cap on remote units")
    parser.add_argument(
        "--exact-up-to",
        type=int,
        default=EXACT_CUSTOMER_LIMIT,
        help="keep full DP fronts up to this many customers, -1 for always"
        f" (default {EXACT_CUSTOMER_LIMIT}; larger trees use --front-limit 1)",
    )
    parser.add_argument(
        "--objective",
        choices=["total", "power"],
        help="what a unit budget minimises (default: power for --sweep-budget,"
        " so watts never rise along the sweep; total otherwise)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loopcutter", description="Plan DSL access networks with remote units"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic dataset")
    _add_common(gen, with_input=False)
    gen.add_argument("--preset", choices=sorted(datagen.DATASET_PRESETS))
    gen.add_argument("--spec", help="JSON file of CitySpec fields")
    gen.add_argument("--km", type=float, help="side of the square in km")
    gen.add_argument("--nodes", type=int)
    gen.add_argument("--edges", type=int)
    gen.add_argument("--customers", type=int)
    gen.add_argument("--candidate-fraction", type=float)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--dig-per-m", type=float)
    gen.add_argument("--copper-per-m", type=float)
    gen.add_argument("--fiber-per-m", type=float, help="6 or 0.5 for the two presets")
    gen.add_argument("--tree", action="store_true", help="write the all-copper tree")
    gen.add_argument("--grow-customers", type=int, help="add customers to the tree")
    gen.add_argument("--scale", type=float, help="stretch every edge")
    gen.add_argument("--name", default="dataset")
    gen.set_defaults(func=cmd_gen, parser=gen)

    redesign = sub.add_parser("redesign", help="place remote units on a copper tree")
    _add_common(redesign)
    _add_costs(redesign)
    _add_dp(redesign)
    redesign.add_argument("--sweep-budget", type=_int_range, help="budget range A:B")
    redesign.add_argument("--jobs", type=int, default=1)
    redesign.set_defaults(func=cmd_redesign)

    greenfield = sub.add_parser("greenfield", help="plan a network on a street graph")
    _add_common(greenfield)
    _add_costs(greenfield)
    _add_dp(greenfield)
    greenfield.add_argument(
        "--method", choices=["steiner", "mst", "both", "best-of-both"], default="both"
    )
    greenfield.add_argument("--steiner-weight", choices=["dig", "dig+fiber"], default="dig")
    greenfield.add_argument("--additive-power", action="store_true")
    greenfield.add_argument(
        "--exact", action="store_true", help="also solve exactly and record the gap"
    )
    greenfield.set_defaults(func=cmd_greenfield)

    export = sub.add_parser("export-ilp", help="write the integer program")
    export.add_argument("--in", dest="input", required=True)
    export.add_argument("--out", help="output file (default <out dir>/model.lp)")
    export.add_argument("-v", "--verbose", action="count", default=0)
    _add_costs(export)
    export.add_argument("--mps", action="store_true", help="MPS instead of LP")
    export.add_argument("--office-units", action="store_true")
    export.add_argument("--allow-tree", action="store_true")
    export.set_defaults(func=cmd_export_ilp)

    oracle = sub.add_parser("oracle", help="solve a tiny graph exactly")
    _add_common(oracle)
    _add_costs(oracle)
    defaults = SmallLimits()
    oracle.add_argument("--max-edges", type=int, default=defaults.max_edges)
    oracle.add_argument("--max-customers", type=int, default=defaults.max_customers)
    oracle.add_argument("--max-candidates", type=int, default=defaults.max_candidates)
    oracle.set_defaults(func=cmd_oracle)

    report = sub.add_parser("report", help="coverage and power sweeps on a tree")
    _add_common(report)
    _add_costs(report)
    report.add_argument("--scales", type=_float_list, default=[1.0, 1.5, 2.0, 3.0])
    report.add_argument("--customers", type=_int_list, help="customer counts to grow to")
    report.add_argument("--seed", type=int, default=0)
    report.add_argument("--jobs", type=int, default=1)
    report.set_defaults(func=cmd_report)
    return parser


def _describe_infeasible(err: LCInfeasibleError, args: argparse.Namespace) -> str:
    lines = [f"infeasible: {err}"]
    if not err.customers or not getattr(args, "input", None):
        return "\n".join(lines)
    try:
        ds = load_dataset(args.input)
        paths = shortest_paths(ds.graph, ds.graph.office, "length")
        for customer in err.customers:
            lines.append(f"  {customer}: {paths[customer].distance:.1f} m from the office")
    except (LCError, KeyError):
        lines.extend(f"  {customer}" for customer in err.customers)
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LCInfeasibleError as err:
        print(_describe_infeasible(err, args), file=sys.stderr)
    except LCValidationError as err:
        print(f"invalid dataset: {err}", file=sys.stderr)
        for v in err.report.violations:
            print(f"  {v.code} {v.subject}: {v.message}", file=sys.stderr)
    except LCLimitError as err:
        print(f"refused: {err}", file=sys.stderr)
    except LCError as err:
        print(f"error: {err}", file=sys.stderr)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
    return 1
