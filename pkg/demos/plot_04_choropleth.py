"""
Drawing a risk map
==================

Render Geo Score 5 for a toy city laid out as a 6 x 6 grid of square regions.
"""

from georisk import (
    ChoroplethSpec,
    RegionGeometry,
    generate_synthetic,
    join_geometries,
    render_svg,
    score_dataset,
    write_geojson,
)

ds = generate_synthetic(36, (0.5, 0.0, 0.5), noise_sd=0.3, seed=4)
table = score_dataset(ds)

size = 0.01
geometries = []
for k, rid in enumerate(table.region_ids):
    x0, y0 = -74.0 + (k % 6) * size, 40.7 + (k // 6) * size
    ring = [[x0, y0], [x0 + size, y0], [x0 + size, y0 + size], [x0, y0 + size], [x0, y0]]
    geometries.append(RegionGeometry(rid, [[ring]]))

features = join_geometries(table, geometries)
print(f"{len(features.features)} regions matched, {len(features.unmatched_scores)} without geometry")

# %%
# Colors run from blue at score 1 to red at score 10, on the same fixed scale
# for every map.
render_svg(features, ChoroplethSpec("gs5"), "gs5.svg")
render_svg(features, ChoroplethSpec("pos_score"), "pos_score.svg")
write_geojson(features, "scores.geojson")
print("wrote gs5.svg, pos_score.svg and scores.geojson")
