"""Double-shrinkage regression: LASSO followed by Stein-type multiplicative shrinkage."""

__version__ = "0.1.0"

from .errors import DataError, NumericalError
from .model import (
    CoefficientVector,
    Dataset,
    StandardizedDataset,
    destandardize,
    gram,
    predict,
    standardize,
    take,
)
from .lasso import (
    LassoConfig,
    LassoFit,
    LassoPath,
    compute_path,
    fit_lasso,
    kkt_violation,
    lambda_grid,
    lambda_max,
    objective_value,
    soft_threshold,
    standardized_bound,
)
from .shrinkage import (
    ShrinkageVariant,
    ShrunkenFit,
    SteinInputs,
    residual_variance,
    shrink,
    shrinkage_factor,
    signal_statistic,
    stein_condition_value,
    stein_constant,
    stein_inputs,
)
from .simulation import (
    ALL_ESTIMATORS,
    LambdaRule,
    SimConfig,
    SimResult,
    decaying_coefficients,
    export_rmse_table,
    generate_replication,
    replication_losses,
    run_simulation,
    signal_scale_from_r2,
)
from .evaluation import (
    CvPredictionError,
    EstimatorSpec,
    EvalReport,
    FoldPlan,
    bootstrap_evaluate,
    coefficient_rows,
    cv_fraction_curve,
    cv_prediction_error,
    fit_pipeline,
    kfold_split,
    one_se_rule,
    report_rows,
)
from .prostate import export_prostate, load_prostate, packaged_data_path
from .analysis import (
    FractionSelection,
    ProstateAnalysis,
    ShrinkageTable,
    run_prostate_analysis,
    select_fraction,
    shrinkage_table,
)
