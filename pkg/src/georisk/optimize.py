"""Error measures and weight fitting on the (vaccination, density, income) simplex.

All fitting happens in score space: predictors are the single-variable
Geo Scores ``gs1``, ``gs2``, ``gs3`` and the target is an outcome score
column, every value in [1, 10].  A weight vector ``(alpha, beta, gamma)``
predicts ``alpha*gs1 + beta*gs2 + gamma*gs3``.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from georisk.errors import (
    InvalidStart,
    InvalidStep,
    InvalidWeights,
    LengthMismatch,
    NonFiniteGradient,
    RankDeficient,
    TooFewRegions,
)

PREDICTORS = ("gs1", "gs2", "gs3")
TARGET_ALIASES = {"positive": ("pos_score",), "death": ("death_score",), "both": ("pos_score", "death_score")}


@dataclass(frozen=True)
class WeightVector:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(x) and 0.0 <= x <= 1.0 for x in w):
            raise InvalidWeights(f"weights must lie in [0, 1], got {w}")
        if abs(sum(w) - 1.0) > 1e-12:
            raise InvalidWeights(f"weights must sum to 1, got {w}")

    @classmethod
    def from_ab(cls, alpha, beta):
        """Build from the two free weights; ``gamma = 1 - alpha - beta``."""
        gamma = 1.0 - alpha - beta
        if -1e-12 < gamma < 0:
            gamma = 0.0
        return cls(float(alpha), float(beta), float(gamma))

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)

    def on_open_simplex(self):
        return all(x > 0 for x in self.as_tuple())


def _as_weights(w):
    return w if isinstance(w, WeightVector) else WeightVector(*w)


def _pair(predicted, truth):
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape or predicted.ndim != 1 or predicted.size == 0:
        raise LengthMismatch(f"need equal nonzero lengths, got {predicted.shape} and {truth.shape}")
    return predicted, truth


def mean_abs_error(predicted, truth):
    predicted, truth = _pair(predicted, truth)
    return float(np.mean(np.abs(predicted - truth)))


def max_abs_error(predicted, truth):
    predicted, truth = _pair(predicted, truth)
    return float(np.max(np.abs(predicted - truth)))


def _predictors(table):
    missing = [c for c in PREDICTORS if c not in table]
    if missing:
        raise KeyError(f"score table lacks predictor columns {missing}")
    return tuple(table[c] for c in PREDICTORS)


def _mix(g1, g2, g3, alpha, beta):
    # gs3 + alpha*(gs1 - gs3) + beta*(gs2 - gs3); exactly constant when gs1 == gs2 == gs3
    return g3 + alpha * (g1 - g3) + beta * (g2 - g3)


def mix_scores(table, w):
    """Predicted scores ``alpha*gs1 + beta*gs2 + gamma*gs3`` for each region."""
    w = _as_weights(w)
    g1, g2, g3 = _predictors(table)
    return np.clip(_mix(g1, g2, g3, w.alpha, w.beta), 1.0, 10.0)


def resolve_targets(table, targets):
    """Turn ``"positive"``/``"death"``/``"both"``, a column name, or a list of
    column names into a tuple of target arrays."""
    if isinstance(targets, str):
        targets = TARGET_ALIASES.get(targets, (targets,))
    names = tuple(targets)
    if not names:
        raise ValueError("at least one target column required")
    return names, tuple(table[n] for n in names)


def objective(table, targets, w, loss="l1"):
    """Mean over targets of the MAE (``loss="l1"``) or MSE (``"l2"``)."""
    w = _as_weights(w)
    _, arrays = resolve_targets(table, targets)
    g1, g2, g3 = _predictors(table)
    pred = _mix(g1, g2, g3, w.alpha, w.beta)
    return _loss(pred, arrays, loss)


def _loss(pred, arrays, loss):
    if loss == "l1":
        return float(np.mean([np.mean(np.abs(t - pred)) for t in arrays]))
    if loss == "l2":
        return float(np.mean([np.mean((t - pred) ** 2) for t in arrays]))
    raise ValueError(f"loss must be 'l1' or 'l2', got {loss!r}")


@dataclass
class GridResult:
    """Objective values on the ``(alpha, beta)`` grid.

    ``objective[i, j]`` is the value at ``alpha = i*step``, ``beta = j*step``;
    cells with ``gamma < 0`` hold NaN.  ``feasible[i, j]`` requires
    ``gamma >= step``.  ``row_minima[i]`` is the beta index minimising row
    ``i`` and ``col_minima[j]`` the alpha index minimising column ``j``
    (``-1`` where a row or column has no feasible cell).
    """

    step: float
    targets: tuple
    loss: str
    alphas: np.ndarray
    betas: np.ndarray
    objective: np.ndarray
    feasible: np.ndarray
    argmin: WeightVector
    argmin_index: tuple
    min_objective: float
    row_minima: np.ndarray
    col_minima: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def cells(self):
        out = {}
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                if not np.isnan(self.objective[i, j]):
                    out[(float(a), float(b))] = float(self.objective[i, j])
        return out

    def row(self, i):
        """Feasible objective values of row ``i`` (fixed alpha), increasing beta."""
        return self.objective[i][self.feasible[i]]

    def col(self, j):
        """Feasible objective values of column ``j`` (fixed beta), increasing alpha."""
        return self.objective[:, j][self.feasible[:, j]]

    def to_csv(self, path):
        path = Path(path)
        n = len(self.alphas) - 1
        lines = ["alpha,beta,gamma,objective,feasible"]
        for i, a in enumerate(self.alphas):
            for j, b in enumerate(self.betas):
                if i + j > n:
                    continue
                gamma = (n - i - j) / n
                lines.append(
                    f"{a:.6f},{b:.6f},{gamma:.6f},{self.objective[i, j]:.10f},"
                    f"{str(bool(self.feasible[i, j])).lower()}"
                )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def summary(self):
        return {
            "step": self.step,
            "targets": list(self.targets),
            "loss": self.loss,
            "argmin": {"alpha": self.argmin.alpha, "beta": self.argmin.beta, "gamma": self.argmin.gamma},
            "objective": self.min_objective,
            "row_minima": [
                {"alpha": float(self.alphas[i]), "beta": float(self.betas[j])}
                for i, j in enumerate(self.row_minima)
                if j >= 0
            ],
            "col_minima": [
                {"alpha": float(self.alphas[i]), "beta": float(self.betas[j])}
                for j, i in enumerate(self.col_minima)
                if i >= 0
            ],
            "notes": list(self.notes),
        }

    def to_json(self, path):
        path = Path(path)
        path.write_text(json.dumps(self.summary(), indent=2) + "\n", encoding="utf-8")
        return path


def grid_divisions(step):
    """Number of grid intervals for ``step``; raises unless ``step`` divides 1."""
    if not (isinstance(step, (int, float)) and math.isfinite(step) and 0 < step <= 0.5):
        raise InvalidStep(f"grid step must lie in (0, 0.5], got {step!r}")
    n = round(1.0 / step)
    if abs(n * step - 1.0) > 1e-9:
        raise InvalidStep(f"grid step {step!r} does not divide 1")
    return n


def grid_search(table, targets="both", step=0.05, loss="l1"):
    """Exhaustively evaluate the objective over the weight grid.

    Ties for the minimum go to the lexicographically smallest
    ``(alpha, beta)``.
    """
    n = grid_divisions(step)
    names, arrays = resolve_targets(table, targets)
    g1, g2, g3 = _predictors(table)
    grid = np.arange(n + 1) / n

    values = np.full((n + 1, n + 1), np.nan)
    feasible = np.zeros((n + 1, n + 1), dtype=bool)
    for i in range(n + 1):
        for j in range(n + 1 - i):
            values[i, j] = _loss(_mix(g1, g2, g3, grid[i], grid[j]), arrays, loss)
            feasible[i, j] = n - i - j >= 1

    best = None
    for i in range(n + 1):
        for j in range(n + 1):
            if feasible[i, j] and (best is None or values[i, j] < values[best]):
                best = (i, j)

    row_minima = np.full(n + 1, -1)
    col_minima = np.full(n + 1, -1)
    for k in range(n + 1):
        if feasible[k].any():
            row_minima[k] = int(np.argmin(np.where(feasible[k], values[k], np.inf)))
        if feasible[:, k].any():
            col_minima[k] = int(np.argmin(np.where(feasible[:, k], values[:, k], np.inf)))

    i, j = best
    argmin = WeightVector(float(grid[i]), float(grid[j]), (n - i - j) / n)
    notes = []
    if n - i - j == 1:
        # a neighbouring gamma = 0 cell beats or ties the reported optimum
        edge = [(i + 1, j), (i, j + 1)]
        if any(values[c] <= values[i, j] for c in edge if c[0] + c[1] <= n):
            notes.append(
                f"argmin clamped to gamma={step:g} by the gamma>0 rule; "
                "the unconstrained grid optimum lies on gamma=0"
            )
    return GridResult(
        step=float(step),
        targets=names,
        loss=loss,
        alphas=grid.copy(),
        betas=grid.copy(),
        objective=values,
        feasible=feasible,
        argmin=argmin,
        argmin_index=(i, j),
        min_objective=float(values[i, j]),
        row_minima=row_minima,
        col_minima=col_minima,
        notes=notes,
    )


def residual_subgradient(row, w):
    """Subgradient of ``|target - prediction|`` for a single region.

    ``row`` maps ``gs1``, ``gs2``, ``gs3`` and ``target`` to scores.  Returns
    ``(gs3 - gs1, gs3 - gs2)`` when the residual ``target - prediction`` is
    positive, the negation when it is negative, and ``(0, 0)`` at the kink.
    """
    w = _as_weights(w)
    g1, g2, g3, t = row["gs1"], row["gs2"], row["gs3"], row["target"]
    residual = t - _mix(g1, g2, g3, w.alpha, w.beta)
    if residual > 0:
        return (g3 - g1, g3 - g2)
    if residual < 0:
        return (g1 - g3, g2 - g3)
    return (0.0, 0.0)


def l1_subgradient(table, target, alpha, beta):
    """Summed per-region subgradients of the total L1 error at ``(alpha, beta)``."""
    g1, g2, g3 = _predictors(table)
    t = table[target] if isinstance(target, str) else np.asarray(target, dtype=float)
    s = np.sign(t - _mix(g1, g2, g3, alpha, beta))
    return float(s @ (g3 - g1)), float(s @ (g3 - g2))


def l1_error(table, target, alpha, beta):
    """Total L1 distance between target and prediction at ``(alpha, beta)``."""
    g1, g2, g3 = _predictors(table)
    t = table[target] if isinstance(target, str) else np.asarray(target, dtype=float)
    return float(np.sum(np.abs(t - _mix(g1, g2, g3, alpha, beta))))


@dataclass
class FitResult:
    weights: WeightVector
    trace: list
    stop_reason: str
    iterations: int
    train_mae: float
    test_mae: float = None
    start: WeightVector = None
    final: WeightVector = None

    def to_dict(self, trace_every=1):
        trace_every = max(int(trace_every), 1)
        trace = [t for t in self.trace if t[0] % trace_every == 0]
        if self.trace and trace[-1] != self.trace[-1]:
            trace.append(self.trace[-1])
        return {
            "weights": {"alpha": self.weights.alpha, "beta": self.weights.beta, "gamma": self.weights.gamma},
            "final_iterate": None
            if self.final is None
            else {"alpha": self.final.alpha, "beta": self.final.beta, "gamma": self.final.gamma},
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "train_mae": self.train_mae,
            "test_mae": self.test_mae,
            "trace": [{"iteration": n, "alpha": a, "beta": b, "train_mae": m} for n, a, b, m in trace],
        }


def _clamp_to_simplex(a, b):
    """Clamp the weights that left [0, 1] back onto the simplex boundary.

    Returns the clamped pair and whether any clamping happened.
    """
    clamped = False
    if a < 0:
        a, clamped = 0.0, True
    if b < 0:
        b, clamped = 0.0, True
    if a + b > 1:
        # gamma went negative: pin it to 0, keeping the alpha:beta split
        total = a + b
        a = a / total
        b = 1.0 - a
        clamped = True
    return a, b, clamped


def fit_subgradient(train, target, start=(1 / 3, 1 / 3, 1 / 3), step_size=0.001, tol=1e-6,
                    max_iters=100_000, test=None, on_boundary="stop"):
    """Fit simplex weights by fixed-step subgradient descent on the train MAE.

    Each iteration moves ``(alpha, beta)`` against the mean per-region
    subgradient times ``step_size``.  Iteration stops when the largest weight
    change falls below ``tol`` (``"converged"``) or after ``max_iters`` steps
    (``"max_iters"``).

    A step that takes alpha, beta or gamma outside [0, 1] has the offending
    weight clamped to the boundary.  By default (``on_boundary="stop"``) the
    run ends there with ``"boundary"``, so the result can depend strongly on
    the start.  ``on_boundary="project"`` keeps descending along that face
    and stops with ``"boundary"`` only at a vertex.

    Subgradient steps are not monotone, so ``weights`` is the iterate with the
    lowest train MAE seen along the way; ``final`` is the last iterate.
    """
    start = _as_weights(start)
    if not start.on_open_simplex():
        raise InvalidStart(f"start must lie strictly inside the simplex, got {start.as_tuple()}")
    if on_boundary not in ("project", "stop"):
        raise ValueError(f"on_boundary must be 'project' or 'stop', got {on_boundary!r}")
    if not (step_size > 0 and tol > 0 and max_iters >= 1):
        raise ValueError("step_size and tol must be positive and max_iters at least 1")

    g1, g2, g3 = _predictors(train)
    t = train[target] if isinstance(target, str) else np.asarray(target, dtype=float)
    k = t.size
    base = t - g3
    d1 = g1 - g3
    d2 = g2 - g3

    a, b = start.alpha, start.beta
    r = base - a * d1 - b * d2
    mae = float(np.mean(np.abs(r)))
    trace = [(0, a, b, mae)]
    best = (mae, a, b)
    stop_reason = "max_iters"
    n = 0
    for n in range(1, max_iters + 1):
        s = np.sign(r)
        grad_a = -float(s @ d1) / k
        grad_b = -float(s @ d2) / k
        if not (math.isfinite(grad_a) and math.isfinite(grad_b)):
            raise NonFiniteGradient(f"non-finite subgradient at iteration {n}")
        da = -grad_a * step_size
        db = -grad_b * step_size

        new_a, new_b, hit = _clamp_to_simplex(a + da, b + db)
        change = max(abs(new_a - a), abs(new_b - b))
        a, b = new_a, new_b
        r = base - a * d1 - b * d2
        mae = float(np.mean(np.abs(r)))
        trace.append((n, a, b, mae))
        if mae < best[0]:
            best = (mae, a, b)
        if hit and (on_boundary == "stop" or max(a, b, 1.0 - a - b) >= 1.0):
            stop_reason = "boundary"
            break
        if change < tol:
            stop_reason = "converged"
            break

    mae, best_a, best_b = best
    weights = WeightVector.from_ab(best_a, best_b)
    test_mae = None
    if test is not None:
        test_mae = mean_abs_error(mix_scores(test, weights), test[target] if isinstance(target, str) else target)
    return FitResult(
        weights=weights,
        trace=trace,
        stop_reason=stop_reason,
        iterations=n,
        train_mae=mae,
        test_mae=test_mae,
        start=start,
        final=WeightVector.from_ab(a, b),
    )


def alternating_split(dataset):
    """Even positions of the canonical order train, odd positions test."""
    n = len(dataset)
    if n < 4:
        raise TooFewRegions(f"need at least 4 regions to split, got {n}")
    idx = np.arange(n)
    return idx[0::2], idx[1::2]


@dataclass
class OlsResult:
    intercept: float
    coef_vacc: float
    coef_dens: float
    coef_income: float
    train_mae: float
    test_mae: float = None

    @property
    def coefficients(self):
        return np.array([self.intercept, self.coef_vacc, self.coef_dens, self.coef_income])

    def predict(self, table):
        g1, g2, g3 = _predictors(table)
        return self.intercept + self.coef_vacc * g1 + self.coef_dens * g2 + self.coef_income * g3

    def sign_report(self):
        """Notes on coefficients that defy the risk reading of the scores.

        Each score rises with risk, so a negative coefficient means a higher
        score predicts a lower outcome; the weights also need not sum to 1.
        """
        notes = []
        for name, value in (("vaccination", self.coef_vacc), ("density", self.coef_dens),
                            ("income", self.coef_income)):
            if value < 0:
                notes.append(f"{name} coefficient {value:.4f} is negative: higher {name} risk score predicts lower outcome")
        total = self.coef_vacc + self.coef_dens + self.coef_income
        notes.append(f"coefficients sum to {total:.4f} with intercept {self.intercept:.4f}")
        return notes

    def to_dict(self):
        return {
            "intercept": self.intercept,
            "coef_vacc": self.coef_vacc,
            "coef_dens": self.coef_dens,
            "coef_income": self.coef_income,
            "train_mae": self.train_mae,
            "test_mae": self.test_mae,
            "notes": self.sign_report(),
        }


def design_matrix(table):
    g1, g2, g3 = _predictors(table)
    return np.column_stack([np.ones_like(g1), g1, g2, g3])


def fit_ols(train, target, test=None):
    """Least-squares fit of ``target ~ 1 + gs1 + gs2 + gs3``."""
    X = design_matrix(train)
    y = train[target] if isinstance(target, str) else np.asarray(target, dtype=float)
    if X.shape[0] < 5:
        raise TooFewRegions(f"need at least 5 training rows for OLS, got {X.shape[0]}")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficient("design matrix (1, gs1, gs2, gs3) is rank deficient")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    result = OlsResult(*map(float, coef), train_mae=mean_abs_error(X @ coef, y))
    if test is not None:
        y_test = test[target] if isinstance(target, str) else None
        result.test_mae = mean_abs_error(result.predict(test), y_test)
    return result


def geo_score_errors(table, geo_columns=("gs1", "gs2", "gs3", "gs4", "gs5", "gs6", "gs7"),
                     outcomes=("pos_score", "death_score")):
    """Mean and max absolute error of each Geo Score against each outcome score."""
    out = {}
    for g in geo_columns:
        out[g] = {
            o: {"mae": mean_abs_error(table[g], table[o]), "max": max_abs_error(table[g], table[o])}
            for o in outcomes
        }
    return out
