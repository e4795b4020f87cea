from .gridsearch import (
    GAMMA_INV_DIM,
    CvCell,
    GridSearchConfig,
    GridSearchResult,
    kfold_grid_search,
    stratified_folds,
)
from .kernels import KernelKind, KernelSpec, ScalerParams, fit_scaler, kernel_eval, kernel_matrix
from .model import (
    PRISTINE,
    TAMPERED,
    SvmModel,
    export_model_text,
    label_value,
    load_model,
    predict,
    save_model,
    train_svm,
)

__all__ = [
    "GAMMA_INV_DIM", "CvCell", "GridSearchConfig", "GridSearchResult",
    "kfold_grid_search", "stratified_folds", "KernelKind", "KernelSpec",
    "ScalerParams", "fit_scaler", "kernel_eval", "kernel_matrix", "PRISTINE",
    "TAMPERED", "SvmModel", "export_model_text", "label_value", "load_model",
    "predict", "save_model", "train_svm",
]
