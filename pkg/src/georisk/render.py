"""Choropleth SVG and annotated GeoJSON output."""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import quoteattr

log = logging.getLogger(__name__)

DEFAULT_ID_PROPS = ("modzcta", "ZCTA5CE10")
SCORE_DOMAIN = (1.0, 10.0)


def normalize_region_id(region_id):
    """Zero-pad to the 5-digit ZCTA width; longer ids are left unchanged."""
    text = str(region_id).strip()
    if text.endswith(".0") and text[:-2].isdigit():
        text = text[:-2]
    return text.zfill(5)


@dataclass
class RegionGeometry:
    """Polygons of one region, as a list of polygons each a list of closed rings."""

    region_id: str
    polygons: list

    def __post_init__(self):
        for poly in self.polygons:
            for ring in poly:
                if len(ring) < 4:
                    raise ValueError(f"region {self.region_id}: ring has fewer than 4 points")
                if tuple(ring[0]) != tuple(ring[-1]):
                    raise ValueError(f"region {self.region_id}: ring is not closed")

    @property
    def rings(self):
        return [ring for poly in self.polygons for ring in poly]

    def geojson_geometry(self):
        if len(self.polygons) == 1:
            return {"type": "Polygon", "coordinates": self.polygons[0]}
        return {"type": "MultiPolygon", "coordinates": self.polygons}


def load_geometries(path, id_prop=None):
    """Read a GeoJSON FeatureCollection of Polygon/MultiPolygon features.

    The region id comes from ``id_prop`` or, when not given, the first of
    ``modzcta`` and ``ZCTA5CE10`` present on the feature.
    """
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    props_to_try = (id_prop,) if id_prop else DEFAULT_ID_PROPS
    out = []
    for k, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        key = next((p for p in props_to_try if props.get(p) not in (None, "")), None)
        if key is None:
            raise ValueError(f"feature {k} has none of the id properties {props_to_try}")
        geom = feature.get("geometry") or {}
        if geom.get("type") == "Polygon":
            polygons = [geom["coordinates"]]
        elif geom.get("type") == "MultiPolygon":
            polygons = geom["coordinates"]
        else:
            raise ValueError(f"feature {k}: unsupported geometry type {geom.get('type')!r}")
        out.append(RegionGeometry(str(props[key]), polygons))
    return out


@dataclass
class FeatureSet:
    features: list
    unmatched_scores: list = field(default_factory=list)
    unmatched_geometries: list = field(default_factory=list)
    columns: list = field(default_factory=list)


def join_geometries(scores, geo):
    """Pair score rows with geometries by normalized region id.

    Both kinds of mismatch are returned in the result rather than dropped.
    """
    by_id = {}
    for g in geo:
        by_id.setdefault(normalize_region_id(g.region_id), g)
    features = []
    unmatched = []
    used = set()
    for i, rid in enumerate(scores.region_ids):
        key = normalize_region_id(rid)
        g = by_id.get(key)
        if g is None:
            unmatched.append(rid)
            continue
        used.add(key)
        props = {name: float(col[i]) for name, col in scores.columns.items()}
        features.append({"region_id": key, "geometry": g, "properties": props})
    unmatched_geo = [g.region_id for g in geo if normalize_region_id(g.region_id) not in used]
    return FeatureSet(features, unmatched, unmatched_geo, list(scores.columns))


def _parse_hex(color):
    color = color.lstrip("#")
    if len(color) != 6:
        raise ValueError(f"expected #RRGGBB, got {color!r}")
    return tuple(int(color[i:i + 2], 16) for i in (0, 2, 4))


@dataclass
class ChoroplethSpec:
    score_column: str
    color_low: str = "#2C7BB6"
    color_high: str = "#D7191C"
    missing_color: str = "#BDBDBD"
    domain: tuple = SCORE_DOMAIN

    def __post_init__(self):
        for c in (self.color_low, self.color_high, self.missing_color):
            _parse_hex(c)
        if tuple(self.domain) != SCORE_DOMAIN:
            raise ValueError("color domain is fixed to [1, 10]")

    def fill(self, score):
        """Hex fill for ``score``: linear RGB ramp over [1, 10], rounded half up."""
        if score is None or not math.isfinite(score):
            return self.missing_color.upper()
        lo, hi = self.domain
        t = min(max((score - lo) / (hi - lo), 0.0), 1.0)
        low, high = _parse_hex(self.color_low), _parse_hex(self.color_high)
        rgb = [math.floor(a + (b - a) * t + 0.5) for a, b in zip(low, high)]
        return "#" + "".join(f"{c:02X}" for c in rgb)


def _projector(features, width=1000.0):
    lons = [p[0] for f in features for ring in f["geometry"].rings for p in ring]
    lats = [p[1] for f in features for ring in f["geometry"].rings for p in ring]
    lon0, lon1, lat0, lat1 = min(lons), max(lons), min(lats), max(lats)
    kx = math.cos(math.radians((lat0 + lat1) / 2.0))
    span = max((lon1 - lon0) * kx, 1e-12)
    scale = width / span
    height = max((lat1 - lat0) * scale, 1.0)

    def project(lon, lat):
        return (lon - lon0) * kx * scale, (lat1 - lat) * scale

    return project, width, height


def render_svg(features, spec, out):
    """Write one filled ``<path>`` per region in equirectangular projection."""
    items = features.features if isinstance(features, FeatureSet) else features
    if not items:
        raise ValueError("nothing to render: feature set is empty")
    project, width, height = _projector(items)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.2f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">',
        f"<title>{spec.score_column}</title>",
        '<g stroke="#FFFFFF" stroke-width="0.5" fill-rule="evenodd">',
    ]
    for f in items:
        parts = []
        for ring in f["geometry"].rings:
            pts = [project(lon, lat) for lon, lat, *_ in ring]
            parts.append("M" + " L".join(f"{x:.2f},{y:.2f}" for x, y in pts[:-1]) + " Z")
        score = f["properties"].get(spec.score_column)
        lines.append(
            f'<path id={quoteattr("r" + f["region_id"])} fill="{spec.fill(score)}" '
            f'd="{" ".join(parts)}"><title>{f["region_id"]}: {_fmt_score(score)}</title></path>'
        )
    lines += ["</g>", "</svg>"]
    out = Path(out)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def _fmt_score(score):
    return "missing" if score is None or not math.isfinite(score) else f"{score:.3f}"


def write_geojson(features, out):
    """Write a FeatureCollection carrying ``region_id`` and every score column."""
    items = features.features if isinstance(features, FeatureSet) else features
    collection = {
        "type": "FeatureCollection",
        "features": [
            {
                "type": "Feature",
                "properties": {
                    "region_id": f["region_id"],
                    **{k: (v if math.isfinite(v) else None) for k, v in f["properties"].items()},
                },
                "geometry": f["geometry"].geojson_geometry(),
            }
            for f in items
        ],
    }
    out = Path(out)
    out.write_text(json.dumps(collection) + "\n", encoding="utf-8")
    return out
