"""agorasim: agent-based market simulation with algebraic law checking.

Objects are property sets; agents value them through per-property weight
functions; value differences are distances that must behave like distances;
bundles scale nonlinearly; trades happen when the buyer's valuation delta
meets the seller's. Every one of those structural claims is checkable, and
the checkers are the core of the library.
"""

from .bundling import BundlingModel, bundle_value, bundled_total, check_scalar_laws
from .errors import (
    AgorasimError,
    DomainMismatch,
    InsufficientSamples,
    MissingAttribute,
    MissingDistance,
    NonFiniteWeight,
    NonPositiveCount,
    NotOwner,
    ParseError,
    SearchBudgetExceeded,
    UnitMismatch,
    UnknownCommand,
    ValidationError,
)
from .functors import (
    AgentAttributeSet,
    ConstantRule,
    FlagRule,
    LabelRule,
    PerUnitRule,
    PreferenceRelation,
    ProspectRule,
    SegmentReport,
    ValueFunctor,
    check_functor_laws,
    discounting_functor,
    evaluate,
    lift,
    prospect_shape,
    rank_preferences,
    rules_functor,
    segment_analysis,
)
from .market import (
    Agent,
    EventLog,
    MarketState,
    NoTradeEvent,
    OwnershipTransfer,
    TradeEvent,
    evaluate_transaction,
    ownership_deltas,
    ownership_transfer,
    run_rounds,
    settle,
)
from .optimize import (
    DesignProblem,
    DesignResult,
    PriceProblem,
    PriceResult,
    optimize_design,
    optimize_price,
)
from .properties import (
    PropertyMorphism,
    PropertySet,
    PropertyValue,
    apply_morphism,
    check_morphism_laws,
    compose,
    identity,
    rewrite,
)
from .reports import LawReport, LawVerdict, Witness
from .scenario import Scenario, dump_scenario, load_scenario, loads_scenario, run_market
from .valuations import (
    ArbitrageFinding,
    TableMetric,
    ValuationSet,
    WeightedL1Metric,
    check_metric_axioms,
    detect_arbitrage,
    distance,
    labelled_point,
)

__version__ = "0.1.0"
