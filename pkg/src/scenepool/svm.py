"""One-vs-rest support vector machines with linear and histogram-intersection
kernels.

Binary models solve the soft-margin C-SVC dual

    min_a  0.5 a'Qa - e'a   s.t.  0 <= a_i <= C,  sum_i y_i a_i = 0,
    Q_ij = y_i y_j K(x_i, x_j)

by sequential minimal optimization with second-order working-set selection
(maximal violating pair refined by the best objective decrease), stopping
when the maximal KKT violation falls below ``tol``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import LabelSpace

KERNELS = ("linear", "hik")

_TAU = 1e-12
# Rows per chunk when materializing min(x_j, y_j) tables for the
# intersection kernel; bounds memory to roughly chunk*n*d floats.
_HIK_CHUNK = 256


def kernel_eval(kind: str, x: np.ndarray, y: np.ndarray) -> float:
    """Kernel value of two vectors: dot product, or sum of element minima."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"kernel arguments must be equal-length vectors, got {a.shape} vs {b.shape}")
    if kind == "linear":
        return float(a @ b)
    if kind == "hik":
        return float(np.minimum(a, b).sum())
    raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


def kernel_matrix(kind: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise kernel table of shape (len(a), len(b))."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(f"incompatible shapes {a.shape} vs {b.shape}")
    if kind == "linear":
        return a @ b.T
    if kind == "hik":
        out = np.empty((a.shape[0], b.shape[0]))
        for start in range(0, a.shape[0], _HIK_CHUNK):
            stop = min(start + _HIK_CHUNK, a.shape[0])
            out[start:stop] = np.minimum(a[start:stop, None, :], b[None, :, :]).sum(axis=2)
        return out
    raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


@njit(cache=True)
def _smo_loop(K, y, c, tol, max_iter):  # pragma: no cover - exercised via _smo_solve
    """Jitted optimizer core.

    Works on ``f_t = -y_t * grad_t`` (the violation scores) directly;
    ``grad = -y * f`` can be reconstructed by the caller.  Returns
    ``(alpha, f, iterations, converged)``.
    """
    n = y.shape[0]
    alpha = np.zeros(n)
    f = y.copy()  # grad starts at -1, so f = -y*grad = y
    up = np.empty(n, dtype=np.bool_)
    low = np.empty(n, dtype=np.bool_)
    for t in range(n):
        up[t] = y[t] > 0.0
        low[t] = y[t] < 0.0
    tau = 1e-12

    it = 0
    converged = False
    while it < max_iter:
        # Maximal violating score on the ascent side.
        i = -1
        m = -np.inf
        for t in range(n):
            if up[t] and f[t] > m:
                m = f[t]
                i = t
        m_low = np.inf
        for t in range(n):
            if low[t] and f[t] < m_low:
                m_low = f[t]
        if i < 0 or not np.isfinite(m_low) or m - m_low <= tol:
            converged = True
            break

        # Second-order partner: among violating candidates, maximize the
        # guaranteed objective decrease b^2 / a.
        kii = K[i, i]
        j = -1
        best = -np.inf
        for t in range(n):
            if low[t] and f[t] < m:
                a = kii + K[t, t] - 2.0 * K[i, t]
                if a <= 0.0:
                    a = tau
                b = m - f[t]
                gain = b * b / a
                if gain > best:
                    best = gain
                    j = t
        if j < 0:  # unreachable while m - m_low > tol; guards index wraparound
            converged = True
            break

        quad = kii + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = tau
        old_ai = alpha[i]
        old_aj = alpha[j]
        gi = -y[i] * f[i]
        gj = -y[j] * f[j]
        if y[i] != y[j]:
            delta = (-gi - gj) / quad
            diff = old_ai - old_aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            else:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = c + diff
        else:
            delta = (gi - gj) / quad
            total = old_ai + old_aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > c:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total

        # f_t = -y_t*grad_t and grad_t += Q_ti*dai + Q_tj*daj collapse to a
        # y-free update because Q folds the labels in.
        dai = (alpha[i] - old_ai) * y[i]
        daj = (alpha[j] - old_aj) * y[j]
        for t in range(n):
            f[t] -= K[i, t] * dai + K[j, t] * daj

        for t in (i, j):
            if y[t] > 0.0:
                up[t] = alpha[t] < c
                low[t] = alpha[t] > 0.0
            else:
                up[t] = alpha[t] > 0.0
                low[t] = alpha[t] < c
        it += 1

    return alpha, f, it, converged


def _smo_solve(K, y, c, tol, max_iter):
    """Return (alpha, rho, iterations, converged) for the C-SVC dual."""
    gram = np.ascontiguousarray(K, dtype=np.float64)
    labels = np.ascontiguousarray(y, dtype=np.float64)
    alpha, f, it, converged = _smo_loop(gram, labels, float(c), float(tol), int(max_iter))
    if not converged:
        warnings.warn(
            f"SMO hit the iteration cap ({max_iter}) before reaching tolerance {tol}",
            RuntimeWarning,
            stacklevel=3,
        )
    rho = _calculate_rho(alpha, -f, y, c)
    return alpha, rho, it, converged


def _calculate_rho(alpha, yg, y, c):
    # yg holds y_t * grad_t for every point.
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return float(yg[free].mean())
    at_lower = alpha <= 0
    at_upper = alpha >= c
    ub_mask = (at_lower & (y > 0)) | (at_upper & (y < 0))
    lb_mask = (at_lower & (y < 0)) | (at_upper & (y > 0))
    ub = float(yg[ub_mask].min()) if ub_mask.any() else np.inf
    lb = float(yg[lb_mask].max()) if lb_mask.any() else -np.inf
    return (ub + lb) / 2.0


@dataclass(frozen=True)
class BinarySvmModel:
    """One trained binary classifier.

    ``alphas`` holds the signed dual coefficients ``y_i * a_i`` of the
    support vectors; the decision function is
    ``f(x) = sum_i alphas_i K(sv_i, x) + bias``.  Linear models also carry
    the collapsed weight vector for O(d) evaluation.
    """

    support_vectors: np.ndarray
    alphas: np.ndarray
    bias: float
    kernel: str
    c: float
    weights: np.ndarray | None = None
    converged: bool = True

    def decision_values(self, xs: np.ndarray, use_kernel: bool = False) -> np.ndarray:
        mat = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if mat.shape[1] != self.support_vectors.shape[1]:
            raise ValueError(
                f"expected {self.support_vectors.shape[1]} features, got {mat.shape[1]}"
            )
        if self.kernel == "linear" and self.weights is not None and not use_kernel:
            return mat @ self.weights + self.bias
        gram = kernel_matrix(self.kernel, mat, self.support_vectors)
        return gram @ self.alphas + self.bias


def train_binary(
    data: np.ndarray,
    labels: np.ndarray,
    kind: str = "linear",
    c: float = 1.0,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> BinarySvmModel:
    """Train one binary model on labels in {-1, +1}."""
    x = np.asarray(data, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError(f"bad training shapes {x.shape} / {y.shape}")
    if not np.isfinite(x).all():
        raise ValueError("training data contains non-finite values")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be -1 or +1")
    if (y > 0).all() or (y < 0).all():
        raise ValueError("training labels contain a single class")
    if c <= 0:
        raise ValueError("regularization constant must be positive")
    if kind not in KERNELS:
        raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")

    n = x.shape[0]
    if max_iter is None:
        max_iter = max(100_000, 200 * n)
    gram = kernel_matrix(kind, x, x)
    alpha, rho, _, converged = _smo_solve(gram, y, float(c), tol, max_iter)

    sv = alpha > 0
    if not sv.any():
        raise RuntimeError("no support vectors after training; degenerate problem")
    signed = alpha[sv] * y[sv]
    svs = np.ascontiguousarray(x[sv])
    weights = svs.T @ signed if kind == "linear" else None
    return BinarySvmModel(
        support_vectors=svs,
        alphas=signed,
        bias=-rho,
        kernel=kind,
        c=float(c),
        weights=weights,
        converged=converged,
    )


@dataclass(frozen=True)
class OvrSvmModel:
    """Per-class binary models aligned with a label space.

    An entry may be ``None`` when a class had no training samples in some
    fold; its decision value is then minus infinity.
    """

    models: tuple[BinarySvmModel | None, ...]
    label_space: LabelSpace

    def __post_init__(self):
        if len(self.models) != len(self.label_space):
            raise ValueError("need exactly one binary model per class")
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_classes(self) -> int:
        return len(self.label_space)

    def decision_values(self, xs: np.ndarray) -> np.ndarray:
        mat = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        out = np.full((mat.shape[0], self.n_classes), -np.inf)
        for class_id, model in enumerate(self.models):
            if model is not None:
                out[:, class_id] = model.decision_values(mat)
        return out


def train_ovr(
    data: np.ndarray,
    labels: np.ndarray,
    kind: str = "linear",
    c: float = 1.0,
    label_space: LabelSpace | None = None,
    tol: float = 1e-3,
    skip_empty: bool = False,
) -> OvrSvmModel:
    """Train one-vs-rest models, one binary classifier per class.

    ``labels`` are integer class ids.  With ``skip_empty`` a class absent
    from the training data gets a ``None`` model and a warning instead of
    an error (used by leave-one-out folds that exhaust a class).
    """
    x = np.asarray(data, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError(f"bad training shapes {x.shape} / {y.shape}")
    if label_space is None:
        label_space = LabelSpace(tuple(str(i) for i in range(int(y.max()) + 1)))
    n_classes = len(label_space)
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError("labels outside the label space")
    if len(np.unique(y)) < 2 and not skip_empty:
        raise ValueError("one-vs-rest training needs at least two classes present")

    models: list[BinarySvmModel | None] = []
    for class_id in range(n_classes):
        binary = np.where(y == class_id, 1.0, -1.0)
        has_pos = bool((binary > 0).any())
        has_neg = bool((binary < 0).any())
        if not (has_pos and has_neg):
            reason = "no training samples" if not has_pos else "no rest samples"
            if not skip_empty:
                raise ValueError(f"class {label_space.name_of(class_id)!r} has {reason}")
            warnings.warn(
                f"class {label_space.name_of(class_id)!r} has {reason}; "
                "it cannot be scored in this fold",
                RuntimeWarning,
                stacklevel=2,
            )
            models.append(None)
            continue
        models.append(train_binary(x, binary, kind=kind, c=c, tol=tol))
    return OvrSvmModel(models=tuple(models), label_space=label_space)


def predict(model: OvrSvmModel, x: np.ndarray) -> tuple[int, np.ndarray]:
    """Predicted class id and the per-class decision values.

    The label is the argmax of the decision values; exact ties resolve to
    the lowest class id.
    """
    decisions = model.decision_values(np.asarray(x, dtype=np.float64))[0]
    return int(np.argmax(decisions)), decisions


def kkt_violation(model: BinarySvmModel, data: np.ndarray, labels: np.ndarray) -> float:
    """Maximal KKT violation of a trained binary model over its training set.

    For each point with margin ``m = y f(x)``: free support vectors must
    sit on the margin (|m - 1|), zero-alpha points must satisfy m >= 1,
    bound points m <= 1.  Returns the largest violation.
    """
    x = np.asarray(data, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    margins = y * model.decision_values(x, use_kernel=True)

    # Recover each training point's alpha by matching support vectors.
    alphas = np.zeros(x.shape[0])
    used = np.zeros(model.support_vectors.shape[0], dtype=bool)
    for idx in range(x.shape[0]):
        for s in range(model.support_vectors.shape[0]):
            if not used[s] and np.array_equal(x[idx], model.support_vectors[s]):
                alphas[idx] = abs(model.alphas[s])
                used[s] = True
                break
    if not used.all():
        raise ValueError("support vectors do not all appear in the provided data")

    c = model.c
    worst = 0.0
    for a, m in zip(alphas, margins):
        if a <= 0:
            worst = max(worst, 1.0 - m)
        elif a >= c:
            worst = max(worst, m - 1.0)
        else:
            worst = max(worst, abs(m - 1.0))
    return float(worst)


def dual_objective(model: BinarySvmModel) -> float:
    """Value of the dual objective 0.5 a'Qa - e'a at the trained solution."""
    signed = model.alphas
    gram = kernel_matrix(model.kernel, model.support_vectors, model.support_vectors)
    return float(0.5 * signed @ gram @ signed - np.abs(signed).sum())
