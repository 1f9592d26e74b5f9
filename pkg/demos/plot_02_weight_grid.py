"""
Searching the weight simplex on a grid
======================================

Every mixture ``alpha*gs1 + beta*gs2 + gamma*gs3`` with alpha and beta on a
0.05 grid, scored by the average of the positivity and death MAEs.
"""

import numpy as np

from georisk import generate_synthetic, grid_search, score_dataset

ds = generate_synthetic(214, (0.45, 0.0, 0.55), noise_sd=0.5, seed=2021)
table = score_dataset(ds)
result = grid_search(table, "both", step=0.05)

w = result.argmin
print(f"grid optimum: alpha={w.alpha:.2f} beta={w.beta:.2f} gamma={w.gamma:.2f} "
      f"objective={result.min_objective:.4f}")

# %%
# Along every row (fixed alpha) and column (fixed beta) the error falls to a
# single minimum and rises again.  Row minima never stray far from beta = 0.
for i in range(0, 21, 4):
    j = result.row_minima[i]
    print(f"alpha={result.alphas[i]:.2f}: row minimum at beta={result.betas[j]:.2f}")

# %%
# The same table as a heatmap; cells with gamma < 0.05 are blank.
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    shown = np.where(result.feasible, result.objective, np.nan)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(shown, origin="lower", extent=(-0.025, 1.025, -0.025, 1.025), cmap="viridis")
    ax.set_xlabel("beta (density)")
    ax.set_ylabel("alpha (vaccination)")
    ax.plot(w.beta, w.alpha, "r*", markersize=12)
    fig.colorbar(im, label="mean of the two MAEs")
    fig.savefig("weight_grid.png", dpi=120, bbox_inches="tight")
    print("saved weight_grid.png")
