"""Integer option portfolios with a prescribed payoff shape.

Pipeline: parse a quote chain (`market_data`), pick a consecutive strike
series, describe the target shape (`model_builder.StrategySpec`), then
`optimizer.optimize` searches every ask/bid price combination, solving one
bounded integer program per combination (`ilp_solver`). `payoff_engine`
evaluates the resulting piecewise-linear payoff exactly, in cents.
"""

from .ilp_solver import (
    BRUTE_FORCE_LIMIT,
    DEFAULT_NODE_BUDGET,
    IntSolution,
    LpSolution,
    LpStatus,
    SolverError,
    SolverNumericalError,
    SolverResourceError,
    brute_force,
    solve_ilp,
    solve_ilp_reference,
    solve_lp_relaxation,
)
from .market_data import (
    DuplicateQuoteError,
    MarketDataError,
    OptionChain,
    OptionQuote,
    ParseError,
    Right,
    SchemaError,
    SelectionError,
    SeriesSelection,
    Side,
    ValidationReport,
    Violation,
    chain_to_csv,
    chain_to_json,
    parse_chain,
    select_series,
    validate_chain,
)
from .model_builder import (
    CapacityError,
    ConstraintViolation,
    CostTarget,
    IlpProblem,
    PriceCombination,
    Relation,
    Row,
    SpecError,
    StrategySpec,
    TailLossMode,
    build_subproblem,
    check_feasible,
    combination_count,
    enumerate_combinations,
)
from .money import MoneyError, format_money, parse_money
from .optimizer import (
    PortfolioSolution,
    SweepAxis,
    SweepPoint,
    SweepReport,
    optimize,
    solution_from_dict,
    solution_to_dict,
    solution_to_json,
    sweep_cost,
    sweep_liquidity,
    sweep_to_dict,
    sweep_to_json,
)
from .payoff_engine import (
    ContractPrices,
    PayoffCurve,
    Portfolio,
    PriceConsistencyError,
    curve_to_csv,
    initial_cost,
    interval_slope,
    payoff,
    payoff_curve,
    pnl,
)

__version__ = "0.1.0"

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "CapacityError",
    "ConstraintViolation",
    "ContractPrices",
    "CostTarget",
    "DEFAULT_NODE_BUDGET",
    "DuplicateQuoteError",
    "IlpProblem",
    "IntSolution",
    "LpSolution",
    "LpStatus",
    "MarketDataError",
    "MoneyError",
    "OptionChain",
    "OptionQuote",
    "ParseError",
    "PayoffCurve",
    "Portfolio",
    "PortfolioSolution",
    "PriceCombination",
    "PriceConsistencyError",
    "Relation",
    "Right",
    "Row",
    "SchemaError",
    "SelectionError",
    "SeriesSelection",
    "Side",
    "SolverError",
    "SolverNumericalError",
    "SolverResourceError",
    "SpecError",
    "StrategySpec",
    "SweepAxis",
    "SweepPoint",
    "SweepReport",
    "TailLossMode",
    "ValidationReport",
    "Violation",
    "brute_force",
    "build_subproblem",
    "chain_to_csv",
    "chain_to_json",
    "check_feasible",
    "combination_count",
    "curve_to_csv",
    "enumerate_combinations",
    "format_money",
    "initial_cost",
    "interval_slope",
    "optimize",
    "parse_chain",
    "parse_money",
    "payoff",
    "payoff_curve",
    "pnl",
    "select_series",
    "solution_from_dict",
    "solution_to_dict",
    "solution_to_json",
    "solve_ilp",
    "solve_ilp_reference",
    "solve_lp_relaxation",
    "sweep_cost",
    "sweep_liquidity",
    "sweep_to_dict",
    "sweep_to_json",
    "validate_chain",
]
