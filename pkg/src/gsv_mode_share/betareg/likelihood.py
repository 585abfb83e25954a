"""
Beta-regression log-likelihood, score and expected information (logit mean link).
"""
from typing import Sequence, Tuple

import numpy as np
from scipy.special import digamma, expit, gammaln, polygamma

from gsv_mode_share.betareg.design import DesignMatrix
from gsv_mode_share.errors import NumericalDomainError


def _mean(beta: Sequence[float], design: DesignMatrix) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (design.x.shape[1],):
        raise ValueError(f"expected {design.x.shape[1]} coefficients, got {beta.shape}")
    mu = expit(design.x @ beta)
    bad = np.flatnonzero((mu <= 0.0) | (mu >= 1.0))
    if bad.size:
        raise NumericalDomainError(int(bad[0]), "fitted mean is numerically 0 or 1")
    return mu


def _check_phi(phi: float) -> float:
    phi = float(phi)
    if not (phi > 0 and np.isfinite(phi)):
        raise ValueError(f"precision phi must be positive and finite, got {phi}")
    return phi


def log_likelihood(beta: Sequence[float], phi: float, design: DesignMatrix) -> float:
    """Weighted beta log-likelihood with mean logistic(xᵀβ) and precision phi.

    Raises:
        NumericalDomainError: If a fitted mean is numerically 0 or 1 (reports the row)
    """
    phi = _check_phi(phi)
    mu = _mean(beta, design)
    y = design.y
    terms = (
        gammaln(phi)
        - gammaln(mu * phi)
        - gammaln((1.0 - mu) * phi)
        + (mu * phi - 1.0) * np.log(y)
        + ((1.0 - mu) * phi - 1.0) * np.log1p(-y)
    )
    return float(np.sum(design.weights * terms))


def gradient(beta: Sequence[float], phi: float, design: DesignMatrix) -> np.ndarray:
    """Analytic score: ∂ℓ/∂β followed by ∂ℓ/∂φ."""
    phi = _check_phi(phi)
    mu = _mean(beta, design)
    y, w = design.y, design.weights
    a, b = mu * phi, (1.0 - mu) * phi
    y_star = np.log(y) - np.log1p(-y)
    mu_star = digamma(a) - digamma(b)
    resid = y_star - mu_star
    # dμ/dη for the logit link
    t = mu * (1.0 - mu)
    d_beta = design.x.T @ (w * phi * resid * t)
    d_phi = np.sum(w * (mu * resid + np.log1p(-y) - digamma(b) + digamma(phi)))
    return np.concatenate([d_beta, [d_phi]])


def fisher_information(beta: Sequence[float], phi: float, design: DesignMatrix) -> np.ndarray:
    """Expected information in the (β, ln φ) parameterization."""
    phi = _check_phi(phi)
    mu = _mean(beta, design)
    w = design.weights
    a, b = mu * phi, (1.0 - mu) * phi
    trig_a, trig_b, trig_phi = polygamma(1, a), polygamma(1, b), polygamma(1, phi)
    t = mu * (1.0 - mu)
    x = design.x

    k_bb = x.T @ (x * (w * phi**2 * t**2 * (trig_a + trig_b))[:, None])
    # cross term and φφ term carry a factor φ per ln φ derivative
    c = phi * (mu * trig_a - (1.0 - mu) * trig_b)
    k_bg = x.T @ (w * t * c) * phi
    d = mu**2 * trig_a + (1.0 - mu) ** 2 * trig_b - trig_phi
    k_gg = np.sum(w * d) * phi**2

    p = x.shape[1]
    info = np.empty((p + 1, p + 1))
    info[:p, :p] = k_bb
    info[:p, p] = k_bg
    info[p, :p] = k_bg
    info[p, p] = k_gg
    return info


def linear_predictor(beta: Sequence[float], design: DesignMatrix) -> np.ndarray:
    return design.x @ np.asarray(beta, dtype=float)


def split_params(theta: np.ndarray) -> Tuple[np.ndarray, float]:
    """(β, ln φ) vector to (β, φ)."""
    return theta[:-1], float(np.exp(theta[-1]))
