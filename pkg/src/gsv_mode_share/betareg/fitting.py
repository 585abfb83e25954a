"""
Maximum-likelihood fitting, prediction and fit diagnostics for beta regression.
"""
import logging
import math
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.special import expit, logit

from gsv_mode_share.betareg.design import INTERCEPT, DesignMatrix, log_covariates
from gsv_mode_share.betareg.likelihood import (
    fisher_information,
    gradient,
    linear_predictor,
    log_likelihood,
    split_params,
)
from gsv_mode_share.errors import (
    ConvergenceError,
    MissingCovariateError,
    NumericalDomainError,
    RankDeficiencyError,
)

logger = logging.getLogger(__name__)

GRADIENT_TOL = 1e-8
STEP_TOL = 1e-10
MAX_ITER = 200
MAX_HALVINGS = 60
# Largest score max-norm a fit may report as converged
OPTIMALITY_TOL = 1e-6
# Log-likelihood changes below this fraction of |ℓ| are summation noise
LL_REL_NOISE = 1e-12

_LOWEST = float(np.nextafter(0.0, 1.0))
_HIGHEST = float(np.nextafter(1.0, 0.0))


class FitDiagnostics(BaseModel):
    """Information criteria and pseudo R² of a fit.

    ``k`` counts the coefficients plus the precision parameter.
    """

    log_lik: float
    aic: float
    bic: float
    pseudo_r2: float = Field(ge=0.0, le=1.0)
    k: int
    n: int

    @classmethod
    def from_log_lik(cls, log_lik: float, k: int, n: int, pseudo_r2: float) -> "FitDiagnostics":
        return cls(
            log_lik=log_lik,
            aic=-2.0 * log_lik + 2.0 * k,
            bic=-2.0 * log_lik + k * math.log(n),
            pseudo_r2=pseudo_r2,
            k=k,
            n=n,
        )


class FittedModel(BaseModel):
    """Beta-regression coefficients on the logit scale plus fit metadata.

    Published-coefficient models carry no precision estimate (``phi`` is None);
    every fitted model has ``phi > 0``.
    """

    covariates: List[str]
    intercept: bool = False
    beta: List[float]
    phi: Optional[float] = Field(default=None, gt=0.0)
    link: Literal["logit"] = "logit"
    log_lik: Optional[float] = None
    n_iter: int = 0
    converged: bool = True
    gradient_norm: Optional[float] = None
    n_obs: int = 0
    weighted: bool = False
    mode: Optional[str] = None
    source: Literal["fitted", "published"] = "fitted"
    diagnostics: Optional[FitDiagnostics] = None
    published_metrics: Dict[str, float] = Field(default_factory=dict)

    @property
    def columns(self) -> List[str]:
        return ([INTERCEPT] if self.intercept else []) + list(self.covariates)

    @model_validator(mode="after")
    def _check_shape(self) -> "FittedModel":
        if len(self.beta) != len(self.columns):
            raise ValueError(f"{len(self.beta)} coefficients for {len(self.columns)} columns {self.columns}")
        return self

    def __str__(self) -> str:
        terms = " ".join(f"{b:+.4g}·{name}" for b, name in zip(self.beta, self.columns))
        return f"logit(μ) = {terms}" + (f", φ = {self.phi:.4g}" if self.phi else "")


def collinear_columns(x: np.ndarray, names: Sequence[str], tol: float = 1e-10) -> List[str]:
    """Names of columns that take part in an exact linear dependence (empty if full rank)."""
    independent: List[int] = []
    involved = set()
    for j in range(x.shape[1]):
        candidate = independent + [j]
        if np.linalg.matrix_rank(x[:, candidate], tol=None) > len(independent):
            independent.append(j)
            continue
        involved.add(j)
        if independent:
            coef, *_ = np.linalg.lstsq(x[:, independent], x[:, j], rcond=None)
            involved.update(independent[i] for i in np.flatnonzero(np.abs(coef) > tol))
    return [names[j] for j in sorted(involved)]


def start_values(design: DesignMatrix) -> Tuple[np.ndarray, float]:
    """Least-squares β on logit(y) and the method-of-moments precision.

    Falls back to β = 0 and φ = 1 when either estimate is unusable.
    """
    x, w = design.x, design.weights
    z = logit(design.y)
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(x * sw[:, None], z * sw, rcond=None)
    if not np.all(np.isfinite(beta)):
        beta = np.zeros(x.shape[1])

    n, p = x.shape
    phi = 1.0
    if n > p:
        mu = expit(x @ beta)
        resid = z - x @ beta
        # variance of y implied by the logit-scale residual variance (delta method)
        sigma2 = (resid @ resid) / (n - p) * (mu * (1.0 - mu)) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            estimate = float(np.mean(mu * (1.0 - mu) / sigma2) - 1.0)
        if np.isfinite(estimate) and estimate > 0:
            phi = estimate
    return beta, phi


def _safe_log_likelihood(theta: np.ndarray, design: DesignMatrix) -> float:
    beta, phi = split_params(theta)
    if not (np.all(np.isfinite(theta)) and np.isfinite(phi) and phi > 0):
        return -np.inf
    try:
        return log_likelihood(beta, phi, design)
    except NumericalDomainError:
        return -np.inf


def _score_norm(theta: np.ndarray, design: DesignMatrix) -> float:
    beta, phi = split_params(theta)
    return float(np.max(np.abs(gradient(beta, phi, design))))


def _slope(theta: np.ndarray, direction: np.ndarray, design: DesignMatrix) -> float:
    """Derivative of the log-likelihood along ``direction`` in (β, ln φ)."""
    beta, phi = split_params(theta)
    score = gradient(beta, phi, design)
    score[-1] *= phi
    return float(score @ direction)


def _line_search(
    theta: np.ndarray, ll: float, direction: np.ndarray, design: DesignMatrix
) -> Optional[Tuple[np.ndarray, float, float]]:
    """First halving of ``direction`` that does not lower the log-likelihood.

    Where the change in ℓ is within rounding of ℓ itself, a candidate is accepted
    when the likelihood still rises along ``direction`` at the candidate. Returns
    (θ, ℓ, step length) or None.
    """
    noise = LL_REL_NOISE * max(1.0, abs(ll))
    step = 1.0
    for _ in range(MAX_HALVINGS):
        candidate = theta + step * direction
        ll_candidate = _safe_log_likelihood(candidate, design)
        if ll_candidate >= ll or (ll_candidate >= ll - noise and _slope(candidate, direction, design) >= 0.0):
            return candidate, ll_candidate, float(np.linalg.norm(step * direction))
        step /= 2.0
    return None


def fit(
    design: DesignMatrix,
    init: Optional[Tuple[Sequence[float], float]] = None,
    max_iter: int = MAX_ITER,
    gtol: float = GRADIENT_TOL,
    xtol: float = STEP_TOL,
) -> Tuple[FittedModel, FitDiagnostics]:
    """Maximize the beta log-likelihood by Fisher scoring with backtracking.

    β and ln φ are updated jointly; each step is halved until the log-likelihood
    does not decrease. Iteration stops when the max-norm of the score falls below
    ``gtol``, or when the accepted step is shorter than ``xtol`` and the score
    max-norm is below ``OPTIMALITY_TOL``. Rows are fitted in a canonical order, so
    permuting the design does not change the estimates.

    Args:
        design: Regression design
        init: Optional (β, φ) start values
        max_iter: Iteration limit
        gtol: Score max-norm tolerance
        xtol: Step-length tolerance

    Returns:
        The fitted model and its diagnostics

    Raises:
        ValueError: If there are not more rows than parameters
        RankDeficiencyError: If the design or information matrix is singular
        ConvergenceError: If ``max_iter`` is exhausted or the line search stalls with
            the score max-norm at or above ``OPTIMALITY_TOL`` (carries the last iterate)
    """
    if design.n_rows <= design.n_params:
        raise ValueError(f"need more rows ({design.n_rows}) than parameters ({design.n_params})")
    collinear = collinear_columns(design.x, design.columns)
    if collinear:
        raise RankDeficiencyError(collinear)
    design = design.canonical()

    if init is not None:
        beta0, phi0 = np.asarray(init[0], dtype=float), float(init[1])
    else:
        beta0, phi0 = start_values(design)
    theta = np.concatenate([beta0, [math.log(phi0)]])
    ll = _safe_log_likelihood(theta, design)
    if not np.isfinite(ll):
        logger.debug("Start values unusable; falling back to beta = 0, phi = 1")
        theta = np.zeros(design.n_params)
        ll = _safe_log_likelihood(theta, design)

    grad_norm = math.inf
    n_iter = 0
    for _ in range(max_iter):
        beta, phi = split_params(theta)
        score = gradient(beta, phi, design)
        grad_norm = float(np.max(np.abs(score)))
        if grad_norm < gtol:
            break
        score[-1] *= phi  # chain rule to ln φ
        info = fisher_information(beta, phi, design)
        try:
            direction = np.linalg.solve(info, score)
        except np.linalg.LinAlgError:
            raise RankDeficiencyError(design.columns) from None

        searched = _line_search(theta, ll, direction, design)
        if searched is None:
            logger.debug("iter %d: no halving improves the fit (score max-norm %.3g)", n_iter, grad_norm)
            break
        theta, ll, step_norm = searched
        n_iter += 1
        logger.debug("iter %d: logLik %.10f, step %.3g", n_iter, ll, step_norm)
        if step_norm < xtol and _score_norm(theta, design) < OPTIMALITY_TOL:
            break
    else:
        raise ConvergenceError(
            f"beta regression did not converge in {max_iter} iterations (score max-norm {grad_norm:.3g})",
            last_iterate=list(theta),
        )

    final_norm = _score_norm(theta, design)
    if final_norm >= OPTIMALITY_TOL:
        raise ConvergenceError(
            f"beta regression stalled after {n_iter} iterations (score max-norm {final_norm:.3g})",
            last_iterate=list(theta),
        )
    beta, phi = split_params(theta)
    model = FittedModel(
        covariates=design.covariates,
        intercept=design.intercept,
        beta=[float(b) for b in beta],
        phi=phi,
        log_lik=ll,
        n_iter=n_iter,
        converged=True,
        gradient_norm=final_norm,
        n_obs=design.n_rows,
        weighted=design.weighted,
    )
    fit_diagnostics = diagnostics(model, design)
    return model.model_copy(update={"diagnostics": fit_diagnostics}), fit_diagnostics


def diagnostics(model: FittedModel, design: DesignMatrix) -> FitDiagnostics:
    """AIC, BIC, log-likelihood and pseudo R² of a model on a design.

    Pseudo R² is the squared Pearson correlation between the linear predictor and
    logit(y).
    """
    if model.phi is None:
        raise ValueError("diagnostics need a precision estimate; published models carry none")
    ll = log_likelihood(model.beta, model.phi, design)
    eta = linear_predictor(model.beta, design)
    z = logit(design.y)
    if np.std(eta) == 0 or np.std(z) == 0:
        r2 = 0.0
    else:
        r2 = float(np.corrcoef(eta, z)[0, 1] ** 2)
    return FitDiagnostics.from_log_lik(ll, k=len(model.beta) + 1, n=design.n_rows, pseudo_r2=min(max(r2, 0.0), 1.0))


def standard_errors(model: FittedModel, design: DesignMatrix) -> np.ndarray:
    """Standard errors of (β, φ) from the inverse expected information."""
    info = fisher_information(model.beta, model.phi, design)
    cov = np.linalg.inv(info)
    se = np.sqrt(np.diag(cov))
    se[-1] *= model.phi  # delta method from ln φ
    return se


def _clamp_open(mu: float) -> float:
    return min(max(mu, _LOWEST), _HIGHEST)


def predict(model: FittedModel, covariates: Mapping[str, float]) -> float:
    """Predicted share logistic(xᵀβ) from raw (untransformed) covariate values.

    Raises:
        MissingCovariateError: If a model covariate is missing from the input
    """
    for name in model.covariates:
        if name not in covariates:
            raise MissingCovariateError(name)
    x = ([1.0] if model.intercept else []) + log_covariates(covariates, model.covariates)
    return _clamp_open(float(expit(float(np.dot(x, model.beta)))))


def predict_design(model: FittedModel, design: DesignMatrix) -> np.ndarray:
    """Predicted shares for every row of a design with matching columns."""
    if design.columns != model.columns:
        raise ValueError(f"design columns {design.columns} do not match model columns {model.columns}")
    mu = expit(linear_predictor(model.beta, design))
    return np.clip(mu, _LOWEST, _HIGHEST)
