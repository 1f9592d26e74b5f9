"""Loading, validating, generating and fetching per-region tables.

The canonical interchange format is a UTF-8 CSV with the header::

    region_id,vacc_rate,pop_density,median_income,positive_rate,death_rate

An empty ``median_income`` cell marks the value as missing; every other
cell is required.  Synthetic datasets additionally carry the outcome scores
they were built from in two trailing columns, ``pos_score`` and
``death_score``, so that a written synthetic file reloads to the same
realizable fitting problem.
"""

import csv
import datetime
import hashlib
import io
import json
import logging
import math
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from georisk.errors import (
    DuplicateRegion,
    GeoRiskError,
    InvalidWeights,
    MalformedRow,
    NetworkError,
    RangeViolation,
    SourceSchemaChanged,
)

log = logging.getLogger(__name__)

CANONICAL_COLUMNS = (
    "region_id",
    "vacc_rate",
    "pop_density",
    "median_income",
    "positive_rate",
    "death_rate",
)
SCORE_COLUMNS = ("pos_score", "death_score")


@dataclass(frozen=True)
class RegionRecord:
    region_id: str
    vacc_rate: float
    pop_density: float
    median_income: Optional[float]
    positive_rate: float
    death_rate: float
    # score-space outcomes; only set for synthetic data
    pos_score: Optional[float] = None
    death_score: Optional[float] = None

    def __post_init__(self):
        if not self.region_id or not self.region_id.isdigit():
            raise RangeViolation("region_id", self.region_id)
        checks = [
            ("vacc_rate", self.vacc_rate, 0.0, 1.0),
            ("pop_density", self.pop_density, 0.0, math.inf),
            ("positive_rate", self.positive_rate, 0.0, 1.0),
            ("death_rate", self.death_rate, 0.0, math.inf),
        ]
        if self.pos_score is not None:
            checks.append(("pos_score", self.pos_score, 1.0, 10.0))
        if self.death_score is not None:
            checks.append(("death_score", self.death_score, 1.0, 10.0))
        for name, value, lo, hi in checks:
            if not (math.isfinite(value) and lo <= value <= hi):
                raise RangeViolation(name, value, self.region_id)
        income = self.median_income
        if income is not None and not (math.isfinite(income) and income > 0):
            raise RangeViolation("median_income", income, self.region_id)

    @property
    def income_missing(self):
        return self.median_income is None


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of regions, sorted by numeric region id."""

    records: tuple
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        records = tuple(sorted(self.records, key=lambda r: int(r.region_id)))
        seen = set()
        for rec in records:
            if rec.region_id in seen:
                raise DuplicateRegion(rec.region_id)
            seen.add(rec.region_id)
        object.__setattr__(self, "records", records)

    def __len__(self):
        return len(self.records)

    @property
    def region_ids(self):
        return tuple(r.region_id for r in self.records)

    def column(self, name):
        """Return a float array for ``name``; missing values become NaN."""
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records],
            dtype=float,
        )

    @property
    def income_missing(self):
        return np.array([r.income_missing for r in self.records], dtype=bool)

    @property
    def has_outcome_scores(self):
        return len(self.records) > 0 and all(
            r.pos_score is not None and r.death_score is not None for r in self.records
        )

    def subset(self, indices):
        return Dataset(tuple(self.records[i] for i in indices), self.provenance)


def _parse_float(text, name, line):
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(line, f"{name}: cannot parse {text!r} as a number") from None


def load_dataset(path, schema=CANONICAL_COLUMNS):
    """Read a canonical CSV into a :class:`Dataset`.

    Rows with an empty ``median_income`` are kept and flagged missing; any
    other empty cell is a :class:`MalformedRow`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MalformedRow(1, "missing header row") from None
        schema = list(schema)
        with_scores = header == schema + list(SCORE_COLUMNS)
        if header != schema and not with_scores:
            raise MalformedRow(1, f"expected header {','.join(schema)}, got {','.join(header)}")

        records = []
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
            cells = dict(zip(header, (c.strip() for c in row)))
            for name in header:
                if name != "median_income" and cells[name] == "":
                    raise MalformedRow(line, f"{name} is empty")
            values = {
                name: _parse_float(cells[name], name, line)
                for name in header
                if name not in ("region_id", "median_income")
            }
            income = cells["median_income"]
            values["median_income"] = None if income == "" else _parse_float(income, "median_income", line)
            if not cells["region_id"].isdigit():
                raise MalformedRow(line, f"region_id {cells['region_id']!r} is not a digit string")
            records.append(RegionRecord(region_id=cells["region_id"], **values))

    for rec in records:
        if rec.income_missing:
            log.warning("region %s: median_income missing", rec.region_id)
    return Dataset(tuple(records), provenance=f"loaded from {path}")


def write_dataset(dataset, path):
    """Write ``dataset`` as canonical CSV; floats are written round-trip exact."""
    path = Path(path)
    header = list(CANONICAL_COLUMNS)
    if dataset.has_outcome_scores:
        header += SCORE_COLUMNS
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in dataset.records:
            row = []
            for name in header:
                value = getattr(rec, name)
                row.append("" if value is None else value if isinstance(value, str) else repr(float(value)))
            writer.writerow(row)
    return path


def generate_synthetic(n_regions, true_weights, noise_sd=0.0, seed=0):
    """Build a dataset whose outcome scores are a known mixture of its Geo Scores.

    Raw covariates are drawn uniformly; their scores are computed exactly as
    :func:`georisk.scoring.geo_scores` would.  Each outcome score is the
    ``true_weights`` mixture of (gs1, gs2, gs3) plus Gaussian noise with
    standard deviation ``noise_sd`` (score units), clamped to [1, 10].  The
    raw outcome columns are monotone images of those scores.
    """
    from georisk.optimize import WeightVector, mix_scores
    from georisk.scoring import geo_scores

    if n_regions < 3:
        raise GeoRiskError("n_regions must be at least 3")
    if noise_sd < 0:
        raise GeoRiskError("noise_sd must be nonnegative")
    if not isinstance(true_weights, WeightVector):
        try:
            true_weights = WeightVector(*true_weights)
        except TypeError:
            raise InvalidWeights(f"expected three weights, got {true_weights!r}") from None

    rng = np.random.default_rng(seed)
    vacc = rng.uniform(0.30, 0.95, n_regions)
    dens = rng.uniform(500.0, 80_000.0, n_regions)
    income = rng.uniform(20_000.0, 250_000.0, n_regions)
    ids = [str(10001 + i) for i in range(n_regions)]

    covariates = Dataset(
        tuple(
            RegionRecord(ids[i], float(vacc[i]), float(dens[i]), float(income[i]), 0.0, 0.0)
            for i in range(n_regions)
        )
    )
    mixture = mix_scores(geo_scores(covariates), true_weights)

    outcomes = []
    for _ in range(2):
        noisy = mixture + rng.normal(0.0, noise_sd, n_regions) if noise_sd > 0 else mixture
        outcomes.append(np.clip(noisy, 1.0, 10.0))
    pos, death = outcomes

    records = tuple(
        RegionRecord(
            region_id=ids[i],
            vacc_rate=float(vacc[i]),
            pop_density=float(dens[i]),
            median_income=float(income[i]),
            positive_rate=float(0.02 + 0.03 * (pos[i] - 1.0)),
            death_rate=float(40.0 * death[i]),
            pos_score=float(pos[i]),
            death_score=float(death[i]),
        )
        for i in range(n_regions)
    )
    provenance = (
        f"synthetic n={n_regions} weights=({true_weights.alpha}, {true_weights.beta}, "
        f"{true_weights.gamma}) noise_sd={noise_sd} seed={seed}"
    )
    return Dataset(records, provenance)


# NYC Department of Health per-MODZCTA cumulative totals
PUBLIC_SOURCES = {
    "nyc": [
        (
            "https://raw.githubusercontent.com/nychealth/coronavirus-data/master/totals/data-by-modzcta.csv",
            ("MODIFIED_ZCTA", "PERCENT_POSITIVE", "COVID_DEATH_RATE"),
        ),
    ],
}


def _download(url, timeout=60):
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        return resp.read()


def fetch_public_data(source_id, out_dir):
    """Download the raw per-ZCTA files for ``source_id`` into ``out_dir``.

    Files are written byte-for-byte as served, together with a
    ``manifest.json`` holding URL, UTC timestamp and SHA-256 of each file.
    Nothing is written unless every download succeeds and passes the
    column check.
    """
    if source_id not in PUBLIC_SOURCES:
        raise GeoRiskError(f"unknown source {source_id!r}; choose from {sorted(PUBLIC_SOURCES)}")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        tempfile.TemporaryFile(dir=out_dir).close()
    except OSError as exc:
        raise GeoRiskError(f"output directory {out_dir} is not writable: {exc}") from None

    payloads = []
    for url, required in PUBLIC_SOURCES[source_id]:
        try:
            body = _download(url)
        except (urllib.error.URLError, OSError) as exc:
            raise NetworkError(f"failed to download {url}: {exc}") from None
        header = next(csv.reader(io.StringIO(body.decode("utf-8-sig"))), [])
        absent = [c for c in required if c not in header]
        if absent:
            raise SourceSchemaChanged(f"{url} lacks columns {absent}")
        payloads.append((url, body))

    manifest = []
    paths = []
    for url, body in payloads:
        target = out_dir / url.rsplit("/", 1)[-1]
        target.write_bytes(body)
        paths.append(target)
        manifest.append(
            {
                "url": url,
                "file": target.name,
                "retrieved": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "sha256": hashlib.sha256(body).hexdigest(),
            }
        )
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return paths
