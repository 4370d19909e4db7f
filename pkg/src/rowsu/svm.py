"""Linear soft-margin SVM trained by SMO, used for per-gene weights.

The dual

    min_a  1/2 a'Qa - sum(a)   s.t.  0 <= a_i <= C,  y'a = 0,
    Q_ij = y_i y_j <x_i, x_j>

is solved by pairwise updates on the maximal-violating pair with
second-order working-set selection.  The primal weight vector is recovered
as ``w = sum_i a_i y_i x_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import POS, DatasetError, ExpressionDataset
from .seeding import rng_for

TAU = 1e-12
MAD_TO_SD = 1.4826
ROBUST_CLIP = 3.0
SCALINGS = ("zscore", "robust", "none")


def feature_scaling(X, scaling: str = "zscore"):
    """Return ``(center, scale, active, clip)`` for the chosen scaling.

    ``zscore``: mean and population standard deviation.
    ``robust``: median and 1.4826 * MAD (standard deviation where the MAD is
    zero), with standardized values winsorized at +-3.
    ``none``: identity.
    """
    if scaling not in SCALINGS:
        raise ValueError(f"scaling must be one of {SCALINGS}, got {scaling!r}")
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    active = X.max(axis=0) > X.min(axis=0)
    if scaling == "none":
        return np.zeros(p), np.ones(p), active, None
    if scaling == "zscore":
        center, sd, clip = X.mean(axis=0), X.std(axis=0), None
    else:
        center = np.median(X, axis=0)
        sd = MAD_TO_SD * np.median(np.abs(X - center), axis=0)
        sd = np.where(sd > 0, sd, X.std(axis=0))
        clip = ROBUST_CLIP
    scale = np.where(active & (sd > 0), sd, 1.0)
    return center, scale, active, clip


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained linear SVM.

    ``w`` and ``b`` live in the solve space ``z = (x - center) / scale``,
    clipped to ``[-clip, clip]`` when ``clip`` is set.  With
    ``scaling="none"`` the centre is 0 and the scale 1, so the solve space is
    the input space.  Constant features are excluded from the solve and have
    ``w == 0``.
    """

    w: np.ndarray
    b: float
    alphas: np.ndarray
    C: float
    tolerance: float
    max_passes: int
    center: np.ndarray
    scale: np.ndarray
    active: np.ndarray
    clip: Optional[float]
    converged: bool
    n_updates: int

    def transform(self, X) -> np.ndarray:
        z = (np.asarray(X, dtype=float) - self.center) / self.scale
        if self.clip is not None:
            z = np.clip(z, -self.clip, self.clip)
        return np.where(self.active, z, 0.0)

    def decision_function(self, X) -> np.ndarray:
        return self.transform(X) @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(np.int8)

    @property
    def margin(self) -> float:
        """Half-width of the margin band, ``1 / ||w||``."""
        return 1.0 / float(np.linalg.norm(self.w))

    def raw_weights(self):
        """``(w, b)`` expressed on the original feature scale (exact only
        when no clipping is applied)."""
        w_raw = self.w / self.scale
        return w_raw, float(self.b - w_raw @ self.center)


def _solve_dual(K, y, C, eps, max_updates, order):
    """SMO on a precomputed kernel.  Returns (alpha, grad, converged, updates)."""
    n = y.size
    alpha = np.zeros(n)
    # G = Q a - 1
    G = -np.ones(n)
    diag = np.diag(K).copy()
    pos = y > 0
    updates = 0
    converged = False
    while updates < max_updates:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * G
        # ties resolved by position in the seeded order
        up_idx = order[up[order]]
        low_idx = order[low[order]]
        if up_idx.size == 0 or low_idx.size == 0:
            converged = True
            break
        i = up_idx[np.argmax(score[up_idx])]
        m = score[i]
        M = score[low_idx].min()
        if m - M < eps:
            converged = True
            break
        cand = low_idx[score[low_idx] < m]
        bgap = m - score[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > TAU, a, TAU)
        j = cand[np.argmin(-(bgap * bgap) / a)]
        a_ij = max(diag[i] + diag[j] - 2.0 * K[i, j], TAU)
        step = (m - score[j]) / a_ij

        # Direction: a_i += y_i * t, a_j -= y_j * t keeps y'a fixed.
        cap_i = C - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min(step, cap_i, cap_j)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        # snap to the box to avoid drift
        for k, hit in ((i, t == cap_i), (j, t == cap_j)):
            if hit:
                alpha[k] = 0.0 if alpha[k] < C / 2 else C
        G += t * y * (K[:, i] - K[:, j])
        updates += 1
    return alpha, G, converged, updates


def _bias(alpha, y, G, C):
    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(score[free].mean())
    pos = y > 0
    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    hi = score[up].max() if up.any() else score.max()
    lo = score[low].min() if low.any() else score.min()
    return float((hi + lo) / 2)


def train_linear_svm(
    train: ExpressionDataset,
    C: float = 1.0,
    tolerance: float = 1e-3,
    seed: int = 0,
    max_passes: int = 1000,
    scaling: str = "zscore",
) -> SvmModel:
    """Fit a linear SVM with labels neg -> -1, pos -> +1.

    Features are rescaled first (see :func:`feature_scaling`); weights are
    reported in the rescaled space so per-gene magnitudes are comparable.

    ``max_passes`` bounds the number of pair updates at ``max_passes * n``;
    hitting the bound returns the last iterate with ``converged=False``.
    ``seed`` fixes the sample order used to break ties in pair selection.
    """
    if train.n_pos == 0 or train.n_neg == 0:
        raise DatasetError("SVM training needs both classes")
    if C <= 0 or tolerance <= 0:
        raise ValueError("C and tolerance must be positive")
    X = train.values
    y = np.where(train.labels == POS, 1.0, -1.0)
    n = X.shape[0]

    center, scale, active, clip = feature_scaling(X, scaling)
    Z = (X - center) / scale
    if clip is not None:
        Z = np.clip(Z, -clip, clip)
    Z = np.where(active, Z, 0.0)

    K = Z @ Z.T
    order = rng_for(seed).permutation(n)
    # internal stopping gap is tighter than the reported KKT tolerance
    alpha, G, converged, updates = _solve_dual(
        K, y, float(C), tolerance / 2, max(1, max_passes) * n, order
    )
    w = (alpha * y) @ Z
    w[~active] = 0.0
    b = _bias(alpha, y, G, float(C))
    return SvmModel(
        w=w,
        b=b,
        alphas=alpha,
        C=float(C),
        tolerance=float(tolerance),
        max_passes=int(max_passes),
        center=center,
        scale=scale,
        active=active,
        clip=clip,
        converged=converged,
        n_updates=updates,
    )


def margin_distance(model: SvmModel, x) -> float:
    """Distance from ``x`` (input space) to the separating hyperplane,
    measured in the solve space: ``|w.z + b| / ||w||``."""
    norm = float(np.linalg.norm(model.w))
    if norm == 0.0:
        raise ValueError("degenerate model: ||w|| = 0")
    x = np.asarray(x, dtype=float)
    if x.shape != model.w.shape:
        raise ValueError(f"expected a vector of length {model.w.size}, got shape {x.shape}")
    return abs(float(model.decision_function(x[None, :])[0])) / norm
