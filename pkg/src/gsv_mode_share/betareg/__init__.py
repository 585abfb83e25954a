"""
Beta regression for GSV Mode Share.
"""
from gsv_mode_share.betareg.design import COVARIATES, INTERCEPT, DesignMatrix, build_design, log_covariates, raw_covariates
from gsv_mode_share.betareg.fitting import (
    FitDiagnostics,
    FittedModel,
    collinear_columns,
    diagnostics,
    fit,
    predict,
    predict_design,
    standard_errors,
    start_values,
)
from gsv_mode_share.betareg.likelihood import fisher_information, gradient, linear_predictor, log_likelihood
from gsv_mode_share.betareg.serialization import load_bundled_model, load_model, model_to_json, save_model
from gsv_mode_share.betareg.weights import compute_weights

__all__ = [
    'COVARIATES', 'INTERCEPT', 'DesignMatrix', 'build_design', 'log_covariates', 'raw_covariates',
    'FitDiagnostics', 'FittedModel', 'collinear_columns', 'diagnostics', 'fit', 'predict',
    'predict_design', 'standard_errors', 'start_values',
    'fisher_information', 'gradient', 'linear_predictor', 'log_likelihood',
    'load_bundled_model', 'load_model', 'model_to_json', 'save_model',
    'compute_weights',
]
