"""Link functions and binomial log-likelihood derivatives.

Each link maps a probability to the real line. The inference engine needs
the binomial log-likelihood and its first four derivatives with respect to
the linear predictor eta; all three supported links are log-concave in eta,
so the negative second derivative is a valid Newton weight.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, gammaln, log_ndtr

LINKS = ("logit", "probit", "cloglog")


def validate_link(name: str) -> str:
    key = name.strip().lower()
    if key not in LINKS:
        raise ValueError(f"unknown link {name!r}; choose one of {', '.join(LINKS)}")
    return key


def inverse(link: str, eta):
    eta = np.asarray(eta, dtype=float)
    if link == "logit":
        return expit(eta)
    if link == "probit":
        return np.exp(log_ndtr(eta))
    if link == "cloglog":
        return -np.expm1(-np.exp(np.clip(eta, -700.0, 30.0)))
    raise ValueError(link)


def forward(link: str, p):
    p = np.asarray(p, dtype=float)
    if link == "logit":
        return np.log(p) - np.log1p(-p)
    if link == "probit":
        from scipy.special import ndtri

        return ndtri(p)
    if link == "cloglog":
        return np.log(-np.log1p(-p))
    raise ValueError(link)


def binom_logconst(y, n):
    """log C(n, y), the eta-free part of the binomial log-likelihood."""
    y = np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    return gammaln(n + 1.0) - gammaln(y + 1.0) - gammaln(n - y + 1.0)


def _probit_mills(eta):
    # phi(eta) / Phi(eta), computed in log space to survive far tails
    logphi = -0.5 * eta * eta - 0.5 * np.log(2.0 * np.pi)
    return np.exp(logphi - log_ndtr(eta))


def loglik(link: str, y, n, eta):
    """Binomial log-likelihood per observation, without the C(n,y) constant."""
    y = np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if link == "logit":
        return y * eta - n * np.logaddexp(0.0, eta)
    if link == "probit":
        return y * log_ndtr(eta) + (n - y) * log_ndtr(-eta)
    if link == "cloglog":
        t = np.exp(np.clip(eta, -700.0, 30.0))
        logp = np.log1p(-np.exp(-np.maximum(t, 1e-300)))
        return y * logp - (n - y) * t
    raise ValueError(link)


def dloglik(link: str, y, n, eta):
    """First and second derivatives of loglik wrt eta, returned as a pair."""
    y = np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if link == "logit":
        p = expit(eta)
        return y - n * p, -n * p * (1.0 - p)
    if link == "probit":
        r_pos = _probit_mills(eta)
        r_neg = _probit_mills(-eta)
        d1 = y * r_pos - (n - y) * r_neg
        d2 = -y * r_pos * (eta + r_pos) - (n - y) * r_neg * (r_neg - eta)
        return d1, d2
    if link == "cloglog":
        t = np.exp(np.clip(eta, -700.0, 30.0))
        p = -np.expm1(-t)
        p = np.clip(p, 1e-300, 1.0)
        w = t * np.exp(-t) / p
        d1 = y * w - (n - y) * t
        # dw/deta = w * (1 - t - w * exp(-... )); differentiate t*exp(-t)/p directly
        dw = w * (1.0 - t) - w * w
        d2 = y * dw - (n - y) * t
        return d1, d2
    raise ValueError(link)


def d34loglik(link: str, y, n, eta):
    """Third and fourth derivatives of loglik wrt eta.

    Analytic for logit; central finite differences of the analytic second
    derivative otherwise (only used for the small moment-correction terms).
    """
    y = np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if link == "logit":
        p = expit(eta)
        pq = p * (1.0 - p)
        d3 = -n * pq * (1.0 - 2.0 * p)
        d4 = -n * pq * ((1.0 - 2.0 * p) ** 2 - 2.0 * pq)
        return d3, d4
    h = 1e-3
    d2m = dloglik(link, y, n, eta - h)[1]
    d2c = dloglik(link, y, n, eta)[1]
    d2p = dloglik(link, y, n, eta + h)[1]
    d3 = (d2p - d2m) / (2.0 * h)
    d4 = (d2p - 2.0 * d2c + d2m) / (h * h)
    return d3, d4
