"""NumPy kernels for the pooled two-sample objective.

Reference implementation of the hot path; ``pendrm._ckernels`` is the
compiled twin with identical signatures and semantics.  The pooled design
``t`` holds the sample-1 rows first, and ``log_rho1 = log(n1/n2)``.

Stability: log(1 + rho1*exp(u)) is evaluated as max(v, 0) + log1p(exp(-|v|))
with v = u + log(rho1), and the logistic weight as exp(-|v|)/(1 + exp(-|v|))
on the appropriate side, so every quantity stays finite for |u| up to 700.
"""

import numpy as np


def loglik(t, beta, alpha, log_rho1, n1):
    """Pooled empirical log-likelihood at (alpha, beta)."""
    u = alpha + t @ beta
    v = u + log_rho1
    e = np.exp(-np.abs(v))
    sp = np.maximum(v, 0.0) + np.log1p(e)
    return float(u[:n1].sum() - sp.sum())


def loglik_score_hessian(t, beta, alpha, log_rho1, n1):
    """Fused objective, score vector, and Hessian in one data pass.

    Returns ``(value, grad, hess)`` where ``grad`` has the alpha component
    first and ``hess`` is the symmetric (d+1) x (d+1) second-derivative
    matrix of the unpenalized objective.
    """
    d = t.shape[1]
    u = alpha + t @ beta
    v = u + log_rho1
    e = np.exp(-np.abs(v))
    ope = 1.0 + e
    sp = np.maximum(v, 0.0) + np.log1p(e)
    sig = np.where(v >= 0.0, 1.0 / ope, e / ope)
    w2 = e / (ope * ope)

    value = float(u[:n1].sum() - sp.sum())

    grad = np.empty(d + 1)
    grad[0] = n1 - sig.sum()
    grad[1:] = t[:n1].sum(axis=0) - t.T @ sig

    hess = np.empty((d + 1, d + 1))
    hess[0, 0] = -w2.sum()
    tw = t.T @ w2
    hess[0, 1:] = -tw
    hess[1:, 0] = -tw
    hess[1:, 1:] = -(t.T * w2) @ t
    return value, grad, hess
