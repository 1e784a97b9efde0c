"""Wave-front tracking for 1-D strictly hyperbolic systems of balance laws.

A fractional-step scheme alternates exact front tracking for the homogeneous
convective part with explicit source updates, while Glimm-type functionals,
interaction measures, and discontinuity-structure analyzers observe the run.
"""

__version__ = "1.0.0"

from .envelope import (
    BACKEND,
    CONTACT,
    GAP,
    EnvelopeResult,
    SampledFunction,
    concave_envelope,
    convex_envelope,
    envelope,
)
from .errors import (
    ComplexEigenvalue,
    ConstraintError,
    ContinuationFailure,
    DomainEscape,
    EmptyWindow,
    EventOverflow,
    FrontTrackError,
    GridMismatch,
    HyperbolicityLoss,
    IoError,
    JumpTooLarge,
    NewtonDivergence,
    NoConvergence,
    NonTransversalEdge,
    NotEquilibrium,
    OutOfWindow,
    SchemaError,
    SingularEigenbasis,
    TVBlowup,
    UnboundedSupport,
)
from .models import (
    EigenStructure,
    SystemModel,
    check_diagonal_dominance,
    check_entropy_dissipation,
    check_shizuta_kawashima,
    eigen_decompose,
    make_model,
    model_names,
)
from .riemann import (
    ElementaryCurveSolution,
    ElementaryWave,
    HugoniotRecord,
    NONPHYSICAL,
    RAREFACTION,
    SHOCK,
    WaveFan,
    elementary_curve,
    hugoniot_classify,
    solve_riemann,
    wave_partition,
)
from .functionals import (
    FrontRecord,
    InteractionLedger,
    MeasureAtom,
    RegionBalance,
    build_measures,
    cancellation_term,
    glimm_functionals,
    interaction_amount,
    region_balance,
)
from .engine import (
    Event,
    Front,
    Profile,
    TrackedSolution,
    advance,
    init_from_datum,
    initial_fronts,
)
from .fracstep import (
    RunReport,
    StepConfig,
    apply_source_step,
    convergence_study,
    discretize_source,
    run,
)
from .structure import (
    ChainMergeReport,
    GENUINELY_NONLINEAR,
    GnlProfile,
    LINEARLY_DEGENERATE,
    PIECEWISE_GNL,
    SubDiscCurve,
    SubDiscontinuity,
    fit_chain_constant,
    gnl_indicator,
    gnl_scan,
    split_subdiscontinuities,
    track_beta_curves,
    verify_chain_merge,
)
from .config import RunConfig, apply_overrides, parse_config
from .output import emit_outputs, fmt, write_csv

__all__ = [name for name in dir() if not name.startswith("_")]
