"""Dense spatial-domain reference computations.

Everything here builds explicit K x K shift matrices and loops in the
spatial domain, sharing no code path with the Fourier implementations.
Indices are linearized row-major.
"""
import itertools

import numpy as np


def shift_matrix(x):
    """K x K matrix whose column k is the k-step shift of the map ``x``.

    Column k = (ki, kj) holds ``x[(i + ki) % H, (j + kj) % W]`` at row (i, j).
    """
    H, W = x.shape
    K = H * W
    X = np.empty((K, K))
    for ki in range(H):
        for kj in range(W):
            col = np.empty((H, W))
            for i in range(H):
                for j in range(W):
                    col[i, j] = x[(i + ki) % H, (j + kj) % W]
            X[:, ki * W + kj] = col.ravel()
    return X


def brute_correlate(x, w):
    """r(k) = sum_d sum_j x_d(j + k) w_d(j) by direct summation, maps (D, H, W)."""
    D, H, W = x.shape
    r = np.zeros((H, W))
    for ki, kj in itertools.product(range(H), range(W)):
        s = 0.0
        for d in range(D):
            for i, j in itertools.product(range(H), range(W)):
                s += x[d, (i + ki) % H, (j + kj) % W] * w[d, i, j]
        r[ki, kj] = s
    return r


def stacked(features):
    """Per-sample stacked matrix [X_1; ...; X_D] of shape (D*K, K)."""
    return np.vstack([shift_matrix(xd) for xd in features])


def block_diag_map(m, D):
    """Diagonal (D*K, D*K) operator for a map shared across channels."""
    return np.diag(np.tile(np.asarray(m, dtype=float).ravel(), D))


def dense_objective(h, beta, feats, weights, y, masks, eta, gamma):
    D = feats.shape[1]
    v = np.tensordot(beta, masks.astype(float), axes=1)
    V = block_diag_map(v, D)
    P = [block_diag_map(m, D) for m in masks]
    hv = h.ravel()
    total = 0.0
    for x, k in zip(feats, weights):
        X = stacked(x)
        f1 = np.sum((y.ravel() - X.T @ V @ hv) ** 2)
        f2 = 0.0
        for Pm in P:
            for Pn in P:
                f2 += np.sum((X.T @ Pm @ hv - X.T @ Pn @ hv) ** 2)
        total += k * (f1 + eta * f2)
    return total + gamma * hv @ hv


def dense_A(beta, feats, weights, masks, eta, gamma):
    D, H, W = feats.shape[1:]
    M = len(masks)
    v = np.tensordot(beta, masks.astype(float), axes=1)
    V = block_diag_map(v, D)
    P = [block_diag_map(m, D) for m in masks]
    Psum = sum(P)
    A = gamma * np.eye(D * H * W)
    for x, k in zip(feats, weights):
        X = stacked(x)
        G = X @ X.T
        At = V.T @ G @ V
        At += 2 * eta * M * sum(Pm.T @ G @ Pm for Pm in P)
        At -= 2 * eta * Psum.T @ G @ Psum
        A += k * At
    return A


def dense_rhs(beta, feats, weights, y, masks):
    D = feats.shape[1]
    v = np.tensordot(beta, masks.astype(float), axes=1)
    V = block_diag_map(v, D)
    return sum(k * V @ stacked(x) @ y.ravel() for x, k in zip(feats, weights))


def dense_C(h, x, masks):
    """K x M matrix of fragment responses via explicit shift matrices."""
    D = x.shape[0]
    X = stacked(x)
    return np.column_stack([X.T @ block_diag_map(m, D) @ h.ravel() for m in masks])


def grid_search_box_qp(Q, b, lo, hi, coarse=0.01, fine=1e-3, halfwidth=0.02):
    """Exhaustive grid minimization of beta.Q.beta - 2 beta.b over a 3-D box.

    Scans the full box at ``coarse`` resolution, then every point of the
    ``fine`` grid within ``halfwidth`` of the coarse winner (the objective is
    convex, so the fine optimum lies there).
    """
    def best(axes):
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vals = np.einsum("pi,ij,pj->p", pts, Q, pts) - 2 * pts @ b
        return pts[np.argmin(vals)]

    n = len(b)
    axis = np.round(np.arange(lo, hi + coarse / 2, coarse), 10)
    c = best([axis] * n)
    fine_axes = []
    for ci in c:
        a = np.round(np.arange(ci - halfwidth, ci + halfwidth + fine / 2, fine), 10)
        fine_axes.append(a[(a >= lo - 1e-12) & (a <= hi + 1e-12)])
    return best(fine_axes)


def grid_search_sum_qp(Q, b, lo, hi, total, step=1e-3):
    """Grid minimization of beta.Q.beta - 2 beta.b over a 3-D box cut by sum(beta) = total.

    The first two coordinates run over the grid, the third is fixed by the sum.
    """
    axis = np.round(np.arange(lo, hi + step / 2, step), 10)
    g0, g1 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([g0.ravel(), g1.ravel(), total - g0.ravel() - g1.ravel()], axis=1)
    pts = pts[(pts[:, 2] >= lo - 1e-12) & (pts[:, 2] <= hi + 1e-12)]
    vals = np.einsum("pi,ij,pj->p", pts, Q, pts) - 2 * pts @ b
    return pts[np.argmin(vals)]
