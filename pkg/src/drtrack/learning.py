"""Joint learning of the base filter and the fragment reliability weights.

The filter applied to a sample is ``w = v * h`` where ``h`` is the base
filter and ``v = sum_m beta_m p^m`` the reliability map.  For a weighted set
of samples ``X_t`` the learner minimizes

    sum_t kappa_t [ ||y - X_t^T V h||^2
                    + eta * sum_{m,n} ||X_t^T P^m h - X_t^T P^n h||^2 ]
    + gamma ||h||^2

over ``h`` and ``beta`` (box constrained), alternating a conjugate-gradient
solve of the normal equations in ``h`` with a small box QP in ``beta``.
The data term only sees ``v * h``, so by default ``beta`` is also held at
mean one; without that the penalties on ``h`` drive every weight to the
upper bound.
Every product with a shift matrix is evaluated in the Fourier domain.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import NotFinite, ShapeMismatch
from .fourier import fft2, ifft2, irfft2, rfft2
from .labels import THETA_MAX, THETA_MIN, assemble_reliability


@dataclass
class LearnConfig:
    eta: float = 1.0
    gamma: float = 1e-2
    theta_min: float = THETA_MIN
    theta_max: float = THETA_MAX
    cg_iters: int = 80
    cg_tol: float = 1e-6
    alternations: int = 2
    learn_beta: bool = True
    qp_iters: int = 1000
    qp_tol: float = 1e-8
    fix_mean: bool = True

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be < theta_max")
        if self.cg_tol <= 0:
            raise ValueError("cg_tol must be > 0")
        if self.cg_iters < 0 or self.alternations < 0:
            raise ValueError("iteration counts must be >= 0")
        if self.fix_mean and not self.theta_min <= 1.0 <= self.theta_max:
            raise ValueError("fix_mean needs theta_min <= 1 <= theta_max")


class TrainingSet:
    """Weighted samples sharing one regression label.

    ``features`` is ``(T, D, H, W)``, ``weights`` sums to one.
    """

    def __init__(self, features, weights, label):
        features = np.asarray(features, dtype=float)
        if features.ndim == 3:
            features = features[None]
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        label = np.asarray(label, dtype=float)
        if features.ndim != 4 or weights.shape != features.shape[:1]:
            raise ShapeMismatch(
                f"features {features.shape} and weights {weights.shape} disagree")
        if label.shape != features.shape[-2:]:
            raise ShapeMismatch(f"label {label.shape} vs features {features.shape}")
        if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-9):
            raise ValueError("sample weights must be non-negative and sum to 1")
        self.features = features
        self.weights = weights
        self.label = label

    @classmethod
    def from_pairs(cls, pairs, label):
        feats, weights = zip(*pairs)
        return cls(np.stack(feats), np.array(weights), label)

    @property
    def sample_shape(self):
        return self.features.shape[1:]

    @cached_property
    def spectra(self):
        return fft2(self.features)

    @cached_property
    def label_spectrum(self):
        return fft2(self.label)


def _check_filter(h, ts):
    h = np.asarray(h, dtype=float)
    if h.size != int(np.prod(ts.sample_shape)):
        raise ShapeMismatch(f"filter of size {h.size} vs samples {ts.sample_shape}")
    return h.reshape(ts.sample_shape)


def _check_masks(masks, ts):
    if masks.shape != ts.sample_shape[-2:]:
        raise ShapeMismatch(f"masks {masks.shape} vs samples {ts.sample_shape}")


def fragment_responses(h, ts, masks):
    """Responses ``X_t^T P^m h`` of every fragment on every sample, ``(T, M, H, W)``."""
    h = _check_filter(h, ts)
    _check_masks(masks, ts)
    pieces = masks.masks[:, None].astype(float) * h[None]
    spec = np.einsum("tdhw,mdhw->tmhw", ts.spectra, np.conj(fft2(pieces)))
    return ifft2(spec)


def objective_value(h, beta, ts, masks, cfg):
    """Weighted data term plus fragment-consistency and ridge penalties."""
    h = _check_filter(h, ts)
    rel = assemble_reliability(beta, masks, cfg.theta_min, cfg.theta_max)
    wf = fft2(rel.apply(h))
    resp = ifft2(np.einsum("tdhw,dhw->thw", ts.spectra, np.conj(wf)))
    data = np.sum((ts.label - resp) ** 2, axis=(-2, -1))
    total = float(ts.weights @ data)
    if cfg.eta > 0 and masks.M > 1:
        frag = fragment_responses(h, ts, masks)
        diff = frag[:, :, None] - frag[:, None, :]
        lrc = np.sum(diff ** 2, axis=(1, 2, 3, 4))
        total += cfg.eta * float(ts.weights @ lrc)
    return total + cfg.gamma * float(np.sum(h * h))


class NormalOperator:
    """Matrix-free ``A`` of the normal equations ``A h = V X y``.

    ``A = g(V) + 2 eta M sum_m g(P^m) - 2 eta g(sum_m P^m) + gamma I`` with
    ``g(L) = L^T (sum_t kappa_t X_t X_t^T) L``.  No K x K matrix is formed.
    """

    def __init__(self, ts, reliability, masks, cfg):
        _check_masks(masks, ts)
        self.v = reliability.v
        self.beta = reliability.beta
        self.masks = masks.masks.astype(float)
        self.target = masks.target.astype(float)
        self.eta = cfg.eta
        self.gamma = cfg.gamma
        self.shape = ts.sample_shape
        T, D, H, W = ts.features.shape
        # frequency-major layout so the per-frequency products become batched matmuls
        xr = rfft2(ts.features)
        self._nfreq = H * xr.shape[-1]
        xr = xr.reshape(T, D, self._nfreq).transpose(2, 0, 1)
        self._xconj = np.ascontiguousarray(np.conj(xr))
        self._wx = np.ascontiguousarray((ts.weights[None, :, None] * xr).transpose(0, 2, 1))

    def gram(self, z):
        """``sum_t kappa_t X_t X_t^T z`` for a batch ``z`` of shape ``(N, D, H, W)``."""
        N, D, H, W = z.shape
        zf = rfft2(z)
        wr = zf.shape[-1]
        zf = zf.reshape(N, D, self._nfreq).transpose(2, 1, 0)
        out = self._wx @ (self._xconj @ zf)
        out = out.transpose(2, 1, 0).reshape(N, D, H, wr)
        return irfft2(out, (H, W))

    def __call__(self, u):
        flat = np.ndim(u) == 1
        u = np.asarray(u, dtype=float)
        if u.size != int(np.prod(self.shape)):
            raise ShapeMismatch(f"vector of size {u.size} vs operator on {self.shape}")
        u = u.reshape(self.shape)
        M = self.masks.shape[0]
        if self.eta > 0 and M > 1:
            # fragments are disjoint, so V u and (sum_m P^m) u are combinations of P^m u
            # and their grams follow by linearity
            g = self.gram(self.masks[:, None] * u[None])
            g_target = g.sum(axis=0)
            g_v = np.tensordot(self.beta, g, axes=1)
            out = self.v * g_v
            out += 2 * self.eta * M * np.sum(self.masks[:, None] * g, axis=0)
            out -= 2 * self.eta * self.target * g_target
        else:
            # a single fragment makes the two consistency terms cancel exactly
            out = self.v * self.gram((self.v * u)[None])[0]
        out += self.gamma * u
        return out.ravel() if flat else out


def normal_matvec(u, ts, reliability, masks, cfg):
    return NormalOperator(ts, reliability, masks, cfg)(u)


def build_rhs(ts, reliability):
    """Right-hand side ``sum_t kappa_t V X_t y``."""
    if reliability.v.shape != ts.sample_shape[-2:]:
        raise ShapeMismatch(f"map {reliability.v.shape} vs samples {ts.sample_shape}")
    yf = np.conj(ts.label_spectrum)
    acc = np.einsum("t,tdhw->dhw", ts.weights, ts.spectra) * yf
    return reliability.v * ifft2(acc)


class CGResult(NamedTuple):
    h: np.ndarray
    residuals: list
    objective: list
    iterations: int


def cg_solve(matvec, rhs, h0=None, cfg=None, max_iter=None, tol=None):
    """Conjugate gradient on ``A h = rhs`` for symmetric positive definite ``A``.

    Residual is ``r = A h - rhs`` and the direction update is
    ``u <- -r + mu u``.  Stops when ``||r|| <= tol ||rhs||``.  Returns the
    2-norm residual history and the quadratic ``h.A.h/2 - rhs.h`` at every
    iterate; the latter is non-increasing in exact arithmetic.
    """
    if max_iter is None:
        max_iter = cfg.cg_iters if cfg is not None else 100
    if tol is None:
        tol = cfg.cg_tol if cfg is not None else 1e-6
    rhs = np.asarray(rhs, dtype=float)
    h = np.zeros_like(rhs) if h0 is None else np.array(h0, dtype=float).reshape(rhs.shape)
    if not np.all(np.isfinite(h)):
        raise NotFinite("initial guess has non-finite entries")

    r = matvec(h) - rhs
    rr = float(np.vdot(r, r))
    stop = tol * np.sqrt(float(np.vdot(rhs, rhs)))
    residuals = [np.sqrt(rr)]
    objective = [0.5 * float(np.vdot(h, r - rhs))]
    u = -r
    it = 0
    while it < max_iter and residuals[-1] > stop:
        Au = matvec(u)
        uAu = float(np.vdot(u, Au))
        if uAu <= 0:
            break
        alpha = rr / uAu
        h = h + alpha * u
        r = r + alpha * Au
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(r))):
            raise NotFinite(f"non-finite iterate at step {it + 1}")
        rr_new = float(np.vdot(r, r))
        u = -r + (rr_new / rr) * u
        rr = rr_new
        it += 1
        residuals.append(np.sqrt(rr))
        objective.append(0.5 * float(np.vdot(h, r - rhs)))
    return CGResult(h, residuals, objective, it)


def build_beta_qp(h, ts, masks):
    """Quadratic ``beta.Q.beta - 2 beta.b`` equal to the data term minus ``||y||^2``.

    Column ``m`` of ``C_t`` is the response of fragment ``m`` of ``h`` on
    sample ``t``; ``Q = sum_t kappa_t C_t^T C_t`` and ``b = sum_t kappa_t C_t^T y``.
    """
    C = fragment_responses(h, ts, masks).reshape(len(ts.weights), masks.M, -1)
    Q = np.einsum("t,tmk,tnk->mn", ts.weights, C, C)
    b = np.einsum("t,tmk,k->m", ts.weights, C, ts.label.ravel())
    return 0.5 * (Q + Q.T), b


def _lambda_max(Q, iters=200):
    x = np.linspace(1.0, 2.0, Q.shape[0])
    lam = 0.0
    for _ in range(iters):
        y = Q @ x
        n = np.linalg.norm(y)
        if n == 0:
            return 0.0
        lam_new = float(x @ y) / float(x @ x)
        x = y / n
        if abs(lam_new - lam) <= 1e-12 * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def _qp_value(Q, b, beta):
    return float(beta @ Q @ beta - 2 * beta @ b)


def project_box_sum(z, lo, hi, total):
    """Euclidean projection of ``z`` onto ``{lo <= beta <= hi, sum(beta) = total}``."""
    z = np.asarray(z, dtype=float)
    n = z.size
    if not n * lo <= total <= n * hi:
        raise ValueError("sum constraint infeasible for the box")

    def excess(t):
        return np.clip(z - t, lo, hi).sum() - total

    a, b = z.min() - hi, z.max() - lo
    if excess(a) == 0:
        return np.clip(z - a, lo, hi)
    if excess(b) == 0:
        return np.clip(z - b, lo, hi)
    t = brentq(excess, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    beta = np.clip(z - t, lo, hi)
    # absorb the root-finding residue into a free coordinate
    free = (beta > lo) & (beta < hi)
    if free.any():
        k = np.flatnonzero(free)[0]
        beta[k] = np.clip(beta[k] + total - beta.sum(), lo, hi)
    return beta


def solve_box_qp(Q, b, theta_min=THETA_MIN, theta_max=THETA_MAX, beta0=None,
                 max_iter=1000, tol=1e-8, total=None):
    """Minimize ``beta.Q.beta - 2 beta.b`` over the closed box by projected gradient.

    Step length is ``1/lambda_max(Q)`` from power iteration.  Every 25 steps a
    Newton step restricted to the free coordinates is tried and kept only if
    it lowers the objective, which finishes off ill-conditioned problems.
    With ``total`` the feasible set is further cut to ``sum(beta) = total``.
    """
    Q = np.asarray(Q, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(b))):
        raise NotFinite("QP data has non-finite entries")
    lo, hi = theta_min, theta_max
    if total is None:
        def project(z):
            return np.clip(z, lo, hi)
    else:
        def project(z):
            return project_box_sum(z, lo, hi, total)
    if beta0 is None:
        beta = project(np.full(b.shape, 0.5 * (lo + hi)))
    else:
        beta = project(np.asarray(beta0, dtype=float))

    lam = _lambda_max(Q)
    if lam <= 1e-14 * max(1.0, np.abs(b).max(initial=0.0)):
        if total is None:
            # linear objective: push every coordinate to the favourable bound
            return np.where(b > 0, hi, np.where(b < 0, lo, beta))
        lam = 1.0

    step = 1.0 / lam
    value = _qp_value(Q, b, beta)
    for it in range(max_iter):
        g = Q @ beta - b
        if np.linalg.norm(beta - project(beta - g)) < tol:
            break
        beta = project(beta - step * g)
        value = _qp_value(Q, b, beta)
        if it % 25 == 24:
            beta, value = _polish(Q, b, beta, value, project, lo, hi, total is not None)
    if not np.all(np.isfinite(beta)):
        raise NotFinite("QP iterate became non-finite")
    return beta


def _polish(Q, b, beta, value, project, lo, hi, fixed_sum):
    free = (beta > lo) & (beta < hi)
    if not free.any():
        return beta, value
    trial = beta.copy()
    rhs = b[free] - Q[np.ix_(free, ~free)] @ beta[~free]
    Qff = Q[np.ix_(free, free)]
    if fixed_sum:
        # equality-constrained Newton step: keep the sum over free coordinates
        k = int(free.sum())
        K = np.block([[Qff, np.ones((k, 1))], [np.ones((1, k)), np.zeros((1, 1))]])
        r = np.append(rhs, beta[free].sum())
        trial[free] = np.linalg.lstsq(K, r, rcond=None)[0][:k]
    else:
        trial[free] = np.linalg.lstsq(Qff, rhs, rcond=None)[0]
    trial = project(trial)
    trial_value = _qp_value(Q, b, trial)
    if trial_value <= value:
        return trial, trial_value
    return beta, value


def joint_learn(ts, masks, h_init, beta_init, cfg, history=None):
    """Alternate a CG solve for ``h`` with a box QP for ``beta``.

    Runs ``cfg.alternations`` rounds, each starting the CG from the current
    filter.  With ``cfg.fix_mean`` the weights are held at mean one, which
    removes the scale shared between ``h`` and ``beta``.  When ``history`` is a list the objective is appended before the
    first round and after every half-step.
    """
    h = np.zeros(ts.sample_shape) if h_init is None else _check_filter(h_init, ts).copy()
    beta = np.ones(masks.M) if beta_init is None else np.asarray(beta_init, dtype=float).copy()
    beta = np.clip(beta, cfg.theta_min, cfg.theta_max)
    total = float(masks.M) if cfg.fix_mean else None
    if total is not None:
        beta = project_box_sum(beta, cfg.theta_min, cfg.theta_max, total)

    def record():
        if history is not None:
            history.append(objective_value(h, beta, ts, masks, cfg))

    record()
    for _ in range(cfg.alternations):
        rel = assemble_reliability(beta, masks, cfg.theta_min, cfg.theta_max)
        op = NormalOperator(ts, rel, masks, cfg)
        h = cg_solve(op, build_rhs(ts, rel), h, cfg).h
        record()
        if cfg.learn_beta:
            Q, b = build_beta_qp(h, ts, masks)
            beta = solve_box_qp(Q, b, cfg.theta_min, cfg.theta_max, beta,
                                cfg.qp_iters, cfg.qp_tol, total)
            record()
    return h, beta
