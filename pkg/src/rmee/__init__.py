"""Robust binary classification with kernel error criteria (C-Loss, QMEE, RMEE)."""

from .bench import (
    CsvSource,
    ExperimentPlan,
    ResultRow,
    ToySource,
    accuracy,
    confusion_matrix,
    emit_plot_data,
    run_experiment,
    write_results,
)
from .criteria import (
    CriterionSpec,
    PredictionBatch,
    ce_risk,
    closs_objective,
    evaluate,
    inner_product_similarity,
    mse_risk,
    qmee_objective,
    rmee_objective,
)
from .data_contamination import (
    ContaminationSpec,
    LabeledDataset,
    generate_toy,
    inject_attribute_outliers,
    inject_label_outliers,
    load_csv,
    normalize,
    one_vs_all,
    split,
)
from .exceptions import InvalidInputError, InvalidParameterError, NumericFailure, RmeeError
from .hq_optimizer import (
    AdamConfig,
    FitConfig,
    FitTrace,
    cross_validate_sigma,
    estimate_phi,
    fit,
    fit_rmee_full,
    hq_aux_update,
    hq_fit,
    jr2_gradient,
    jr2_objective,
)
from .kernel_density import (
    ClassGaussianParams,
    gaussian_kernel,
    parzen_pdf,
    quadratic_information_potential,
    renyi_quadratic_entropy,
    silverman_bandwidth,
    theoretical_error_pdf,
)
from .models import ElmModel, LogisticModel, elm_init, load_model, lr_init, predict_labels, save_model
from .quantization import Codebook, quantize, restricted_codebook

__version__ = "0.1.0"
