"""2-D projections of term embeddings: PCA and exact t-SNE, plus writers.

Both projectors are deterministic for a given seed and input. Pairwise
distances are computed by explicit row differencing, so translating every
input vector by the same offset leaves the distance matrix (and therefore the
whole t-SNE result) unchanged whenever the arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ValidationError
from .validation import as_float_matrix


@dataclass(frozen=True)
class ProjectedPoint:
    """One term's place in the plane, with optional cluster and label tags."""

    term_id: str
    x: float
    y: float
    cluster: int | None = None
    label: str | None = None


def pairwise_sq_distances(X: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances by per-row differencing.

    Slower than the expanded-norms identity but exact under translation: the
    subtraction happens element by element before any squaring.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    if X.shape[1] == 2:
        dx = X[:, 0][:, None] - X[:, 0][None, :]
        dy = X[:, 1][:, None] - X[:, 1][None, :]
        return dx * dx + dy * dy
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        diff = X - X[i]
        out[i] = np.einsum("ij,ij->i", diff, diff)
    return out


class PCA2D(BaseEstimator):
    """First two principal components via power iteration with deflation.

    Components carry a sign convention (first nonzero loading is positive) so
    repeated runs and refactored BLAS backends agree. Input whose centered
    form is numerically zero has no principal direction and is rejected.
    """

    def __init__(self, max_iter: int = 1000, tol: float = 1e-9):
        self.max_iter = max_iter
        self.tol = tol

    def _power_component(self, Xc: np.ndarray) -> np.ndarray:
        d = Xc.shape[1]
        start = int(np.argmax(np.einsum("ij,ij->j", Xc, Xc)))
        v = np.zeros(d, dtype=np.float64)
        v[start] = 1.0
        for _ in range(self.max_iter):
            w = Xc.T @ (Xc @ v)
            norm = float(np.linalg.norm(w))
            if norm < 1e-30:
                return np.zeros(d, dtype=np.float64)
            w /= norm
            if float(np.max(np.abs(w - v))) <= self.tol:
                v = w
                break
            v = w
        return v

    @staticmethod
    def _fix_sign(v: np.ndarray) -> np.ndarray:
        for entry in v:
            if abs(entry) > 1e-12:
                return -v if entry < 0 else v
        return v

    def fit(self, X, y=None):
        X = as_float_matrix(X, name="points")
        n, d = X.shape
        if n < 2:
            raise ValidationError(f"projection needs at least 2 points, got {n}")
        if d < 2:
            raise ValidationError(f"projection needs dimension >= 2, got {d}")
        self.mean_ = X.mean(axis=0)
        Xc = X - self.mean_
        if float(np.max(np.abs(Xc))) < 1e-12:
            raise ValidationError("input has rank 0: all points coincide")

        v1 = self._fix_sign(self._power_component(Xc))
        X2 = Xc - np.outer(Xc @ v1, v1)
        # after deflation the residual of rank-1 input is pure rounding noise
        # correlated with v1; energy below eps^2 of the original means there
        # is no second direction, not a tiny one
        energy = float(np.einsum("ij,ij->", Xc, Xc))
        residual = float(np.einsum("ij,ij->", X2, X2))
        if residual <= 1e-24 * energy:
            v2 = np.zeros(d, dtype=np.float64)
        else:
            v2 = self._fix_sign(self._power_component(X2))
        self.components_ = np.vstack([v1, v2])
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise ValidationError("PCA2D must be fitted first")
        X = as_float_matrix(X, name="points")
        return (X - self.mean_) @ self.components_.T

    def fit_transform(self, X, y=None) -> np.ndarray:
        return self.fit(X).transform(X)


def _entropy_nats(dist_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """Shannon entropy (nats) and probabilities for one Gaussian row."""
    shifted = dist_row - dist_row.min()
    weights = np.exp(-beta * shifted)
    total = weights.sum()
    p = weights / total
    # H = ln(sum) + beta * <d>, computed on the shifted scale for stability
    entropy = float(np.log(total) + beta * float(np.dot(p, shifted)))
    return entropy, p


def binary_search_row(
    dist_row: np.ndarray,
    target_perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 50,
) -> tuple[np.ndarray, float]:
    """Find the Gaussian precision whose entropy matches the target.

    Returns the conditional probabilities over the row and the achieved
    entropy in nats. The search brackets by doubling and halving, then
    bisects; ``tol`` bounds the entropy error in nats.
    """
    target = float(np.log(target_perplexity))
    beta = 1.0
    beta_min, beta_max = 0.0, np.inf
    entropy, p = _entropy_nats(dist_row, beta)
    for _ in range(max_steps):
        diff = entropy - target
        if abs(diff) <= tol:
            break
        if diff > 0:  # too flat: sharpen
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == 0.0 else (beta + beta_min) / 2.0
        entropy, p = _entropy_nats(dist_row, beta)
    return p, entropy


def joint_probabilities(
    X: np.ndarray, perplexity: float, tol: float = 1e-5
) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized neighbor probabilities and per-row achieved perplexities.

    Conditional rows are calibrated to the requested perplexity by binary
    search, then symmetrized as (C + C^T) / 2n, which sums to one and is
    exactly symmetric.
    """
    X = as_float_matrix(X, name="points")
    n = X.shape[0]
    D = pairwise_sq_distances(X)
    # rescale so typical distances are O(1): the calibrated probabilities are
    # scale-free (beta absorbs any constant factor) but the search starts near
    # its answer and converges well inside the step budget
    positive = D[D > 0]
    if positive.size:
        D = D / positive.mean()
    C = np.zeros((n, n), dtype=np.float64)
    achieved = np.zeros(n, dtype=np.float64)
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        row = D[i][mask[i]]
        p, entropy = binary_search_row(row, perplexity, tol=tol)
        C[i][mask[i]] = p
        achieved[i] = float(np.exp(entropy))
    P = (C + C.T) / (2.0 * n)
    return P, achieved


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    safe_q = np.maximum(Q, 1e-12)
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / safe_q[mask])))


class TSNE2D(BaseEstimator):
    """Exact t-SNE to two dimensions with the classic momentum schedule.

    Early iterations multiply the target probabilities by the exaggeration
    factor; momentum steps from its initial to its final value partway
    through. The KL divergence against the true (unexaggerated) target is
    recorded every iteration.
    """

    def __init__(
        self,
        perplexity: float = 30.0,
        n_iter: int = 1000,
        learning_rate: float = 200.0,
        seed: int = 0,
        early_exaggeration: float = 12.0,
        exaggeration_iter: int = 250,
        momentum_switch_iter: int = 250,
        initial_momentum: float = 0.5,
        final_momentum: float = 0.8,
        calibration_tol: float = 1e-5,
    ):
        self.perplexity = perplexity
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.seed = seed
        self.early_exaggeration = early_exaggeration
        self.exaggeration_iter = exaggeration_iter
        self.momentum_switch_iter = momentum_switch_iter
        self.initial_momentum = initial_momentum
        self.final_momentum = final_momentum
        self.calibration_tol = calibration_tol

    def fit_transform(self, X, y=None) -> np.ndarray:
        X = as_float_matrix(X, name="points")
        n = X.shape[0]
        if n < 4:
            raise ValidationError(f"t-SNE needs at least 4 points, got {n}")
        if self.perplexity < 1.0:
            raise ValidationError(f"perplexity must be >= 1, got {self.perplexity}")
        if self.n_iter < 1:
            raise ValidationError(f"n_iter must be >= 1, got {self.n_iter}")

        perplexity = min(self.perplexity, (n - 1) / 3.0)
        P, achieved = joint_probabilities(X, perplexity, tol=self.calibration_tol)
        self.effective_perplexity_ = perplexity
        self.calibration_ = achieved

        rng = np.random.default_rng(self.seed)
        Y = rng.normal(0.0, 1e-4, size=(n, 2))
        update = np.zeros_like(Y)
        # per-parameter gains, as in the classic reference implementation:
        # grow when gradient and velocity disagree, shrink when they agree
        gains = np.ones_like(Y)
        kl_history: list[float] = []

        for t in range(self.n_iter):
            D = pairwise_sq_distances(Y)
            num = 1.0 / (1.0 + D)
            np.fill_diagonal(num, 0.0)
            Q = num / num.sum()

            target = P * self.early_exaggeration if t < self.exaggeration_iter else P
            W = (target - Q) * num
            grad = 4.0 * (W.sum(axis=1)[:, None] * Y - W @ Y)

            momentum = (
                self.initial_momentum
                if t < self.momentum_switch_iter
                else self.final_momentum
            )
            gains = np.where(np.sign(grad) != np.sign(update), gains + 0.2, gains * 0.8)
            gains = np.maximum(gains, 0.01)
            update = momentum * update - self.learning_rate * (gains * grad)
            Y = Y + update
            kl_history.append(_kl_divergence(P, Q))

        self.embedding_ = Y
        self.kl_history_ = tuple(kl_history)
        return Y


def pca_2d(vectors, ids: list[str] | None = None) -> list[ProjectedPoint]:
    """Project vectors onto their first two principal components."""
    X = as_float_matrix(vectors, name="points")
    coords = PCA2D().fit_transform(X)
    return _as_points(coords, ids)


def tsne_2d(
    vectors,
    perplexity: float = 30.0,
    iterations: int = 1000,
    learning_rate: float = 200.0,
    seed: int = 0,
    ids: list[str] | None = None,
) -> list[ProjectedPoint]:
    """Project vectors to the plane with exact t-SNE."""
    X = as_float_matrix(vectors, name="points")
    coords = TSNE2D(
        perplexity=perplexity,
        n_iter=iterations,
        learning_rate=learning_rate,
        seed=seed,
    ).fit_transform(X)
    return _as_points(coords, ids)


def _as_points(coords: np.ndarray, ids: list[str] | None) -> list[ProjectedPoint]:
    if ids is None:
        ids = [str(i) for i in range(coords.shape[0])]
    if len(ids) != coords.shape[0]:
        raise ValidationError(f"got {len(ids)} ids for {coords.shape[0]} points")
    return [
        ProjectedPoint(term_id=tid, x=float(xy[0]), y=float(xy[1]))
        for tid, xy in zip(ids, coords)
    ]


def tag_points(
    points: list[ProjectedPoint],
    clusters: dict[str, int] | None = None,
    labels: dict[str, str] | None = None,
) -> list[ProjectedPoint]:
    """Attach cluster indices and labels to projected points by term id."""
    tagged = []
    for p in points:
        tagged.append(
            ProjectedPoint(
                term_id=p.term_id,
                x=p.x,
                y=p.y,
                cluster=clusters.get(p.term_id) if clusters else p.cluster,
                label=labels.get(p.term_id) if labels else p.label,
            )
        )
    return tagged


def write_projection_csv(points: list[ProjectedPoint], texts: dict[str, str] | None = None) -> str:
    """Render projected points as CSV text; optional columns appear only when used.

    ``texts`` maps term ids to display texts; ids without an entry (or a
    missing mapping entirely) leave the text column blank.
    """
    import csv
    import io

    texts = texts or {}
    has_cluster = any(p.cluster is not None for p in points)
    has_label = any(p.label is not None for p in points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["term_id", "term_text", "x", "y"]
    if has_cluster:
        header.append("cluster")
    if has_label:
        header.append("label")
    writer.writerow(header)
    for p in points:
        row: list = [p.term_id, texts.get(p.term_id, ""), repr(p.x), repr(p.y)]
        if has_cluster:
            row.append("" if p.cluster is None else p.cluster)
        if has_label:
            row.append(p.label or "")
        writer.writerow(row)
    return buf.getvalue()


_PALETTE = (
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
    "#eeca3b", "#b279a2", "#ff9da6", "#9d755d", "#bab0ac",
)


def scatter_svg(
    points: list[ProjectedPoint],
    *,
    width: int = 800,
    height: int = 800,
    margin: float = 40.0,
    point_radius: float = 4.0,
    show_labels: bool = False,
) -> str:
    """Render points into a fixed-viewport SVG scatter plot.

    Output is deterministic text: coordinates are formatted to 2 decimal
    places and colors cycle through a fixed palette by cluster index.
    """
    if not points:
        raise ValidationError("cannot render an empty scatter plot")
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x: float) -> float:
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y: float) -> float:
        # SVG y grows downward; flip so larger y plots higher
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for p in points:
        color = _PALETTE[p.cluster % len(_PALETTE)] if p.cluster is not None else _PALETTE[0]
        parts.append(
            f'<circle cx="{sx(p.x):.2f}" cy="{sy(p.y):.2f}" r="{point_radius:g}" '
            f'fill="{color}" fill-opacity="0.8"/>'
        )
        if show_labels:
            text = p.label if p.label is not None else p.term_id
            parts.append(
                f'<text x="{sx(p.x) + point_radius + 2:.2f}" y="{sy(p.y):.2f}" '
                f'font-size="10" font-family="sans-serif">{_svg_escape(text)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _svg_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
