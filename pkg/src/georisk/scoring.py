"""Percentile ranks, the exponential transform, and Geo/outcome scores."""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from georisk.errors import InvalidWeights, LengthMismatch, OutOfRange, TooFewValues

DIRECT = "direct"
INVERTED = "inverted"

# higher raw value means lower risk for vaccination and income
RISK_DIRECTION = {
    "vacc_rate": INVERTED,
    "median_income": INVERTED,
    "pop_density": DIRECT,
    "positive_rate": DIRECT,
    "death_rate": DIRECT,
}

GEO_SCORE_COLUMNS = ("gs1", "gs2", "gs3", "gs4", "gs5", "gs6", "gs7")
OUTCOME_COLUMNS = ("pos_score", "death_score")

# gs number -> which of (vaccination, density, income) it averages
GEO_SCORE_DEFINITIONS = {
    "gs1": ("vaccination",),
    "gs2": ("density",),
    "gs3": ("income",),
    "gs4": ("vaccination", "density"),
    "gs5": ("vaccination", "income"),
    "gs6": ("density", "income"),
    "gs7": ("vaccination", "density", "income"),
}


def _check_simplex(weights, tol=1e-12):
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise InvalidWeights("weights must be a nonempty vector")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise InvalidWeights(f"weights must be finite and nonnegative, got {weights.tolist()}")
    if abs(weights.sum() - 1.0) > tol:
        raise InvalidWeights(f"weights must sum to 1, got sum {weights.sum()!r}")
    return weights


def percentile_ranks(values, direction=DIRECT, missing_mask=None):
    """Map raw values to risk-adjusted percentiles in [0, 1].

    The ``r``-th smallest of ``n`` present values (0-based) gets ``r / (n - 1)``;
    tied values share the mean of the percentiles they occupy.  For
    ``direction="inverted"`` the order is reversed so that the largest raw
    value gets percentile 0.  Entries flagged in ``missing_mask`` get 0.
    """
    values = np.asarray(values, dtype=float)
    if direction not in (DIRECT, INVERTED):
        raise ValueError(f"direction must be {DIRECT!r} or {INVERTED!r}, got {direction!r}")
    if missing_mask is None:
        missing_mask = np.zeros(values.shape, dtype=bool)
    missing_mask = np.asarray(missing_mask, dtype=bool)
    if missing_mask.shape != values.shape:
        raise LengthMismatch("missing_mask must match values")
    present = ~missing_mask
    n = int(present.sum())
    if n < 2:
        raise TooFewValues(f"need at least 2 non-missing values, got {n}")
    if not np.all(np.isfinite(values[present])):
        raise OutOfRange("non-missing values must be finite")

    keyed = values[present] if direction == DIRECT else -values[present]
    out = np.zeros(values.shape, dtype=float)
    out[present] = (rankdata(keyed, method="average") - 1.0) / (n - 1)
    return out


def exp_score(percentile):
    """Return ``10 ** percentile``; accepts scalars or arrays in [0, 1]."""
    p = np.asarray(percentile, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise OutOfRange(f"percentile must lie in [0, 1], got {percentile!r}")
    out = np.power(10.0, p)
    return float(out) if out.ndim == 0 else out


def exp_mean_scores(percentile_columns, weights):
    """Vectorised weighted exponential mean: ``sum_j w_j * 10**p_j`` per row."""
    weights = _check_simplex(weights)
    columns = [np.asarray(c, dtype=float) for c in percentile_columns]
    if len(columns) != weights.size:
        raise LengthMismatch(f"{len(columns)} percentile columns but {weights.size} weights")
    total = np.zeros_like(columns[0])
    for w, col in zip(weights, columns):
        if col.shape != total.shape:
            raise LengthMismatch("percentile columns differ in length")
        total = total + w * exp_score(col)
    return total


def exp_mean_score(percentiles, weights=None):
    """Weighted exponential mean of percentiles; equal weights by default."""
    percentiles = list(percentiles)
    if not percentiles:
        raise LengthMismatch("need at least one percentile")
    if weights is None:
        weights = np.full(len(percentiles), 1.0 / len(percentiles))
    weights = list(weights)
    if len(weights) != len(percentiles):
        raise LengthMismatch(f"{len(percentiles)} percentiles but {len(weights)} weights")
    return float(exp_mean_scores([[p] for p in percentiles], weights)[0])


@dataclass
class ScoreTable:
    """Per-region score columns, all on the [1, 10] scale."""

    region_ids: tuple
    columns: dict
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        self.region_ids = tuple(self.region_ids)
        n = len(self.region_ids)
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        for name, col in self.columns.items():
            if col.shape != (n,):
                raise LengthMismatch(f"column {name} has {col.size} entries for {n} regions")

    def __len__(self):
        return len(self.region_ids)

    def __getitem__(self, name):
        return self.columns[name]

    def __contains__(self, name):
        return name in self.columns

    @property
    def names(self):
        return list(self.columns)

    def rows(self, indices):
        indices = np.asarray(indices, dtype=int)
        return ScoreTable(
            tuple(self.region_ids[i] for i in indices),
            {k: v[indices] for k, v in self.columns.items()},
            list(self.warnings),
        )

    def merge(self, other):
        if tuple(other.region_ids) != self.region_ids:
            raise LengthMismatch("score tables cover different regions")
        return ScoreTable(
            self.region_ids, {**self.columns, **other.columns}, self.warnings + other.warnings
        )

    def to_csv(self, path, decimals=6):
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["region_id", *self.columns])
            for i, rid in enumerate(self.region_ids):
                writer.writerow(
                    [rid] + [_format(col[i], decimals) for col in self.columns.values()]
                )
        return path

    @classmethod
    def from_csv(cls, path):
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[0] != "region_id":
                raise ValueError(f"{path}: first column must be region_id")
            ids, rows = [], []
            for row in reader:
                if not row:
                    continue
                ids.append(row[0])
                rows.append([float(x) if x != "" else np.nan for x in row[1:]])
        data = np.array(rows, dtype=float).reshape(len(ids), len(header) - 1)
        return cls(tuple(ids), {name: data[:, j] for j, name in enumerate(header[1:])})


def _format(value, decimals):
    return "" if np.isnan(value) else f"{value:.{decimals}f}"


@dataclass
class ScoreConfig:
    """A named weighted mixture of the single-variable scores."""

    variables: list
    weights: list

    VALID = ("vaccination", "density", "income")

    def __post_init__(self):
        self.variables = list(self.variables)
        self.weights = [float(w) for w in self.weights]
        if not self.variables or any(v not in self.VALID for v in self.variables):
            raise ValueError(f"variables must be a nonempty subset of {self.VALID}")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("variables must be distinct")
        if len(self.weights) != len(self.variables):
            raise LengthMismatch("one weight per variable required")
        _check_simplex(self.weights)

    @classmethod
    def equal(cls, variables):
        variables = list(variables)
        return cls(variables, [1.0 / len(variables)] * len(variables))

    def to_json(self):
        return json.dumps({"variables": self.variables, "weights": self.weights})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(doc["variables"], doc["weights"])


def covariate_percentiles(dataset):
    """Risk-adjusted percentiles for vaccination, density and income."""
    return {
        "vaccination": percentile_ranks(dataset.column("vacc_rate"), INVERTED),
        "density": percentile_ranks(dataset.column("pop_density"), DIRECT),
        # missing income -> percentile 0 -> score 1
        "income": percentile_ranks(
            np.nan_to_num(dataset.column("median_income")), INVERTED, dataset.income_missing
        ),
    }


def mixture_score(percentiles, config):
    return exp_mean_scores([percentiles[v] for v in config.variables], config.weights)


def geo_scores(dataset):
    """Compute Geo Scores 1 through 7 for every region of ``dataset``."""
    percentiles = covariate_percentiles(dataset)
    columns = {
        name: mixture_score(percentiles, ScoreConfig.equal(variables))
        for name, variables in GEO_SCORE_DEFINITIONS.items()
    }
    warnings = [
        f"region {rid}: median_income missing, income score set to 1"
        for rid, missing in zip(dataset.region_ids, dataset.income_missing)
        if missing
    ]
    return ScoreTable(dataset.region_ids, columns, warnings)


def outcome_scores(dataset):
    """Exponential percentile scores of test positivity and death rate.

    Datasets that carry score-space outcomes (synthetic data) return those
    directly.
    """
    if getattr(dataset, "has_outcome_scores", False):
        columns = {
            "pos_score": dataset.column("pos_score"),
            "death_score": dataset.column("death_score"),
        }
    else:
        columns = {
            "pos_score": exp_score(percentile_ranks(dataset.column("positive_rate"), DIRECT)),
            "death_score": exp_score(percentile_ranks(dataset.column("death_rate"), DIRECT)),
        }
    return ScoreTable(dataset.region_ids, columns)


def score_dataset(dataset):
    """Geo Scores and outcome scores in one table."""
    return geo_scores(dataset).merge(outcome_scores(dataset))
