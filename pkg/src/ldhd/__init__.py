"""Analysis of functions on the Boolean hypercube restricted to prefix
subcubes: minimum-degree interpolators, random-feature and position-advice
training dynamics, relative-position bias kernels, and length-generalization
task generators.
"""

from .errors import (
    DimensionMismatchError,
    DivergedError,
    IllConditionedError,
    InfeasibleError,
    InvalidScaleError,
    LdhdError,
    NotIndependentError,
    NotInSpanError,
    NotOrthonormalError,
    RankToleranceError,
    TaskParseError,
    TooLargeError,
    WindowExceededError,
)
from .hypercube import (
    Basis,
    DegreeProfile,
    FourierCoefficients,
    SubcubeSpec,
    TableFunction,
    compare_profiles,
    cube_points,
    degree_profile,
    expand_in_basis,
    fourier_basis,
    index_of_point,
    inner_product,
    make_basis,
    projected_basis,
    subcube_points,
    support_set,
    walsh_transform,
)
from .mindegree import (
    GeneralizationReport,
    InterpolationProblem,
    fourier_min_degree_closed_form,
    generalization_report,
    min_degree_interpolator,
    nfl_interpolator_sum,
)
from .pekernels import (
    RelTable,
    alibi_bias,
    attention_weights,
    rpe_absolute_bias,
    rpe_bias,
    rpe_square_bias,
    rpe_square_bias_reference,
)
from .plaa import (
    advice,
    advice_counts,
    ape_alpha_limit,
    ape_alpha_sweep,
    ape_loss,
    ape_loss_enumerated,
    ape_train,
    corollary_predicate,
    grpe_basis,
    grpe_closed_form,
    grpe_forward,
    grpe_train,
    plaa_basis,
    plaa_forward,
    q_mask,
    rpe_tables,
    sample_feasible_target,
)
from .rfmp import (
    FeatureSet,
    min_norm_amplitudes,
    rfmp_forward,
    rfmp_train_gd,
    rfmp_vs_oracle,
    sample_features,
)
from .tasks import (
    DatasetRecord,
    LatentVariable,
    TaskInstance,
    emit_dataset,
    format_round_trip,
    latent_of,
    oracle_check,
    parse_instance,
    record_of,
    sample_instance,
    score_predictions,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
