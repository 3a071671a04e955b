"""Search all price combinations for the best feasible portfolio.

One integer program per ask/bid combination; the winner is the highest
objective, with ties broken by lowest combination index and then by the
lexicographically smallest quantity vector. Infeasible combinations are
counted, not errored. Results are bit-identical whether the scan runs
sequentially or fanned out over combination ranges in worker processes.

Lexicographic refinement only matters for the reported winner (two candidates
with equal objective and equal index are the same subproblem), so the scan
solves each combination without it and refines once at the end.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import multiprocessing
import os
from dataclasses import dataclass
from typing import Sequence

from .ilp_solver import DEFAULT_NODE_BUDGET, SolverResourceError, solve_ilp
from .market_data import SeriesSelection
from .model_builder import (
    CostTarget,
    PriceCombination,
    Relation,
    StrategySpec,
    build_subproblem,
    combination_count,
)
from .money import format_money
from .payoff_engine import (
    PayoffCurve,
    Portfolio,
    initial_cost,
    payoff_curve,
    pnl,
)


@dataclass(frozen=True)
class PortfolioSolution:
    """The winning portfolio of one optimization run."""

    portfolio: Portfolio
    combination: PriceCombination
    objective: int
    initial_cost: int
    total_contracts: int
    payoff_curve: PayoffCurve
    combos_solved: int
    combos_infeasible: int


class SweepAxis(enum.Enum):
    COST = "cost"
    LIQUIDITY = "liquidity"


@dataclass(frozen=True)
class SweepPoint:
    """One parameter value with its outcome; ``error`` holds a solver
    resource failure message, ``solution`` is None when infeasible."""

    value: int
    solution: PortfolioSolution | None
    error: str | None


@dataclass(frozen=True)
class SweepReport:
    axis: SweepAxis
    points: tuple[SweepPoint, ...]


_Scan = tuple[tuple[int, int] | None, int, int, tuple[int, str] | None]


def _scan_range(
    spec: StrategySpec,
    series: SeriesSelection,
    start: int,
    stop: int,
    node_budget: int,
) -> _Scan:
    """Solve combinations [start, stop); returns (best, solved, infeasible,
    error) where best is (objective, index) and error is (index, message)."""
    best: tuple[int, int] | None = None
    solved = infeasible = 0
    for index in range(start, stop):
        combo = PriceCombination.from_index(series.n, index)
        problem = build_subproblem(spec, series, combo)
        try:
            result = solve_ilp(problem, node_budget=node_budget, refine=False)
        except SolverResourceError as exc:
            return best, solved, infeasible, (index, str(exc))
        if result is None:
            infeasible += 1
            continue
        solved += 1
        if best is None or result.objective > best[0]:
            best = (result.objective, index)
    return best, solved, infeasible, None


_WORKER_STATE: tuple[StrategySpec, SeriesSelection, int] | None = None


def _init_worker(
    spec: StrategySpec, series: SeriesSelection, node_budget: int
) -> None:
    global _WORKER_STATE
    _WORKER_STATE = (spec, series, node_budget)


def _scan_chunk(chunk: tuple[int, int]) -> _Scan:
    assert _WORKER_STATE is not None
    spec, series, node_budget = _WORKER_STATE
    return _scan_range(spec, series, chunk[0], chunk[1], node_budget)


def _chunk_ranges(total: int, parts: int):
    base, extra = divmod(total, parts)
    start = 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        if size:
            yield (start, start + size)
            start += size


def _resolve_workers(workers: int | str | None) -> int:
    if workers in ("auto", None):
        return os.cpu_count() or 1
    if not isinstance(workers, int) or workers < 1:
        raise ValueError(f"workers must be a positive integer or 'auto': {workers!r}")
    return workers


def optimize(
    spec: StrategySpec,
    series: SeriesSelection,
    *,
    workers: int | str | None = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> PortfolioSolution | None:
    """Best feasible portfolio over every price combination, or ``None``.

    ``workers`` is a process count or ``"auto"``; 1 runs in-process. A solver
    budget failure propagates as :class:`SolverResourceError` naming the
    combination index.
    """
    total = combination_count(series.n)
    worker_count = _resolve_workers(workers)
    if worker_count <= 1 or total < 4 * worker_count:
        scans = [_scan_range(spec, series, 0, total, node_budget)]
    else:
        chunks = list(_chunk_ranges(total, 4 * worker_count))
        ctx = multiprocessing.get_context()
        with ctx.Pool(
            processes=worker_count,
            initializer=_init_worker,
            initargs=(spec, series, node_budget),
        ) as pool:
            scans = pool.map(_scan_chunk, chunks)

    errors = [err for _, _, _, err in scans if err is not None]
    if errors:
        index, message = min(errors)
        raise SolverResourceError(f"combination {index}: {message}")
    solved = sum(s for _, s, _, _ in scans)
    infeasible = sum(i for _, _, i, _ in scans)
    candidates = [b for b, _, _, _ in scans if b is not None]
    if not candidates:
        return None
    _, winner_index = min(candidates, key=lambda b: (-b[0], b[1]))

    combo = PriceCombination.from_index(series.n, winner_index)
    problem = build_subproblem(spec, series, combo)
    try:
        final = solve_ilp(problem, node_budget=node_budget, refine=True)
    except SolverResourceError as exc:
        raise SolverResourceError(f"combination {winner_index}: {exc}") from exc
    assert final is not None
    portfolio = Portfolio(
        series=series,
        calls=final.x[: series.n],
        puts=final.x[series.n :],
    )
    prices = combo.contract_prices(series)
    cost = initial_cost(portfolio, prices)
    # exact bookkeeping identity between the compiled objective and the engine
    assert final.objective == pnl(portfolio, prices, spec.expected_price)
    return PortfolioSolution(
        portfolio=portfolio,
        combination=combo,
        objective=final.objective,
        initial_cost=cost,
        total_contracts=portfolio.total_contracts,
        payoff_curve=payoff_curve(portfolio),
        combos_solved=solved,
        combos_infeasible=infeasible,
    )


def _sweep(
    axis: SweepAxis,
    specs: Sequence[tuple[int, StrategySpec]],
    series: SeriesSelection,
    workers: int | str | None,
    node_budget: int,
) -> SweepReport:
    points = []
    for value, run_spec in specs:
        try:
            solution = optimize(
                run_spec, series, workers=workers, node_budget=node_budget
            )
            points.append(SweepPoint(value=value, solution=solution, error=None))
        except SolverResourceError as exc:
            points.append(SweepPoint(value=value, solution=None, error=str(exc)))
    points.sort(key=lambda p: p.value)  # stable: equal values keep input order
    return SweepReport(axis=axis, points=tuple(points))


def sweep_cost(
    spec: StrategySpec,
    series: SeriesSelection,
    cost_values: Sequence[int],
    *,
    workers: int | str | None = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SweepReport:
    """One optimize run per cost target (cents), comparator preserved."""
    if not cost_values:
        raise ValueError("cost_values must be non-empty")
    comparator = (
        spec.cost_target.comparator if spec.cost_target is not None else Relation.EQ
    )
    specs = [
        (v, dataclasses.replace(spec, cost_target=CostTarget(comparator, v)))
        for v in cost_values
    ]
    return _sweep(SweepAxis.COST, specs, series, workers, node_budget)


def sweep_liquidity(
    spec: StrategySpec,
    series: SeriesSelection,
    bound_values: Sequence[int],
    *,
    workers: int | str | None = 1,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> SweepReport:
    """One optimize run per symmetric bound: quantities range in [-v, v]."""
    if not bound_values:
        raise ValueError("bound_values must be non-empty")
    for v in bound_values:
        if v <= 0:
            raise ValueError(f"liquidity bound must be positive: {v}")
    specs = [
        (v, dataclasses.replace(spec, lower=-v, upper=v)) for v in bound_values
    ]
    return _sweep(SweepAxis.LIQUIDITY, specs, series, workers, node_budget)


def solution_to_dict(solution: PortfolioSolution) -> dict:
    series = solution.portfolio.series
    return {
        "objective": format_money(solution.objective),
        "initial_cost": format_money(solution.initial_cost),
        "total_contracts": solution.total_contracts,
        "combination": solution.combination.bitstring,
        "combos_solved": solution.combos_solved,
        "combos_infeasible": solution.combos_infeasible,
        "quantities": {
            "call": {
                str(k): x
                for k, x in zip(series.call_strikes, solution.portfolio.calls)
            },
            "put": {
                str(k): x
                for k, x in zip(series.put_strikes, solution.portfolio.puts)
            },
        },
    }


def solution_to_json(solution: PortfolioSolution) -> str:
    return json.dumps(solution_to_dict(solution), sort_keys=True, indent=2) + "\n"


def solution_from_dict(
    data: dict, series: SeriesSelection
) -> tuple[Portfolio, PriceCombination]:
    """Rebuild the portfolio and combination of a serialized solution."""
    try:
        quantities = data["quantities"]
        calls = tuple(int(quantities["call"][str(k)]) for k in series.call_strikes)
        puts = tuple(int(quantities["put"][str(k)]) for k in series.put_strikes)
        bits = str(data["combination"])
    except KeyError as exc:
        raise ValueError(f"solution data missing {exc.args[0]!r}") from exc
    if len(bits) != 2 * series.n:
        raise ValueError(
            f"combination bitstring {bits!r} does not fit a series of {series.n}"
        )
    combo = PriceCombination.from_index(series.n, int(bits, 2) if bits else 0)
    return Portfolio(series=series, calls=calls, puts=puts), combo


def sweep_to_dict(report: SweepReport) -> dict:
    def fmt_value(v: int) -> str | int:
        return format_money(v) if report.axis is SweepAxis.COST else v

    return {
        "axis": report.axis.value,
        "points": [
            {
                "value": fmt_value(p.value),
                "solution": None if p.solution is None else solution_to_dict(p.solution),
                "error": p.error,
            }
            for p in report.points
        ],
    }


def sweep_to_json(report: SweepReport) -> str:
    return json.dumps(sweep_to_dict(report), sort_keys=True, indent=2) + "\n"


def sweep_point_label(axis: SweepAxis, value: int) -> str:
    if axis is SweepAxis.COST:
        return f"C={format_money(value, trim=True)}"
    return f"|L|={value}"


def render_table(
    blocks: Sequence[tuple[str, PortfolioSolution | None]],
    series: SeriesSelection,
) -> str:
    """Strike-by-strike quantity table with objective and contract footers.

    One Call/Put column pair per block; blanks where a strike is not in that
    leg's series, ``infeasible`` in the footer for empty outcomes.
    """
    strikes = series.unique_strikes
    call_index = {k: i for i, k in enumerate(series.call_strikes)}
    put_index = {k: i for i, k in enumerate(series.put_strikes)}

    label_col = ["Strike"] + [str(k) for k in strikes] + [
        "max F",
        "Total number of contracts",
    ]
    columns: list[tuple[str, list[str], list[str], str, str]] = []
    for label, solution in blocks:
        calls, puts = [], []
        for k in strikes:
            if solution is None:
                calls.append("")
                puts.append("")
                continue
            calls.append(
                str(solution.portfolio.calls[call_index[k]])
                if k in call_index
                else ""
            )
            puts.append(
                str(solution.portfolio.puts[put_index[k]]) if k in put_index else ""
            )
        if solution is None:
            footer_obj, footer_total = "infeasible", ""
        else:
            footer_obj = format_money(solution.objective, trim=True)
            footer_total = str(solution.total_contracts)
        columns.append((label, calls, puts, footer_obj, footer_total))

    width0 = max(len(s) for s in label_col)
    lines = []
    header_top = [" " * width0]
    header_sub = ["Strike".ljust(width0)]
    body = [[str(k).ljust(width0)] for k in strikes]
    footer1 = ["max F".ljust(width0)]
    footer2 = ["Total number of contracts".ljust(width0)]
    for label, calls, puts, footer_obj, footer_total in columns:
        wc = max([len("Call")] + [len(c) for c in calls])
        wp = max([len("Put")] + [len(p) for p in puts])
        pair_width = wc + 2 + wp
        pair_width = max(pair_width, len(label), len(footer_obj), len(footer_total))
        wp = pair_width - wc - 2
        header_top.append(label.center(pair_width))
        header_sub.append("Call".rjust(wc) + "  " + "Put".rjust(wp))
        for i in range(len(strikes)):
            body[i].append(calls[i].rjust(wc) + "  " + puts[i].rjust(wp))
        footer1.append(footer_obj.rjust(pair_width))
        footer2.append(footer_total.rjust(pair_width))
    joiner = "   "
    if any(label for label, *_ in columns):
        lines.append(joiner.join(header_top).rstrip())
    lines.append(joiner.join(header_sub).rstrip())
    for row in body:
        lines.append(joiner.join(row).rstrip())
    lines.append(joiner.join(footer1).rstrip())
    lines.append(joiner.join(footer2).rstrip())
    return "\n".join(lines) + "\n"


def solution_to_table(solution: PortfolioSolution) -> str:
    return render_table([("", solution)], solution.portfolio.series)


def sweep_to_table(report: SweepReport, series: SeriesSelection) -> str:
    blocks = [
        (sweep_point_label(report.axis, p.value), p.solution) for p in report.points
    ]
    return render_table(blocks, series)


def solution_to_csv(solution: PortfolioSolution) -> str:
    series = solution.portfolio.series
    call_index = {k: i for i, k in enumerate(series.call_strikes)}
    put_index = {k: i for i, k in enumerate(series.put_strikes)}
    lines = ["strike,call,put"]
    for k in series.unique_strikes:
        call = solution.portfolio.calls[call_index[k]] if k in call_index else ""
        put = solution.portfolio.puts[put_index[k]] if k in put_index else ""
        lines.append(f"{k},{call},{put}")
    lines.append(f"max_F,{format_money(solution.objective, trim=True)}")
    lines.append(f"total_contracts,{solution.total_contracts}")
    return "\n".join(lines) + "\n"


def sweep_to_csv(report: SweepReport, series: SeriesSelection) -> str:
    call_index = {k: i for i, k in enumerate(series.call_strikes)}
    put_index = {k: i for i, k in enumerate(series.put_strikes)}
    lines = ["value,strike,call,put"]
    for p in report.points:
        value = (
            format_money(p.value, trim=True)
            if report.axis is SweepAxis.COST
            else str(p.value)
        )
        if p.error is not None:
            lines.append(f"{value},error,{p.error},")
            continue
        if p.solution is None:
            lines.append(f"{value},infeasible,,")
            continue
        portfolio = p.solution.portfolio
        for k in series.unique_strikes:
            call = portfolio.calls[call_index[k]] if k in call_index else ""
            put = portfolio.puts[put_index[k]] if k in put_index else ""
            lines.append(f"{value},{k},{call},{put}")
        lines.append(f"{value},max_F,{format_money(p.solution.objective, trim=True)},")
        lines.append(f"{value},total_contracts,{p.solution.total_contracts},")
    return "\n".join(lines) + "\n"
