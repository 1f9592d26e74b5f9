"""
Subgradient descent against least squares
=========================================

Fit the weights on alternating regions, test on the rest, and compare with an
unconstrained linear regression.
"""

import numpy as np

from georisk import alternating_split, fit_ols, fit_subgradient, generate_synthetic, score_dataset

ds = generate_synthetic(214, (0.45, 0.0, 0.55), noise_sd=0.8, seed=7)
table = score_dataset(ds)
train_idx, test_idx = alternating_split(ds)
train, test = table.rows(train_idx), table.rows(test_idx)

for target in ("pos_score", "death_score"):
    fit = fit_subgradient(train, target, test=test, max_iters=20_000)
    ols = fit_ols(train, target, test=test)
    w = fit.weights
    print(f"{target}: descent test MAE {fit.test_mae:.3f} at ({w.alpha:.3f}, {w.beta:.3f}, {w.gamma:.3f}); "
          f"OLS test MAE {ols.test_mae:.3f}")
    for note in ols.sign_report():
        print("   OLS:", note)

# %%
# By default a run ends at its first contact with the simplex boundary, so
# some starts stall early.  Sliding along the face instead makes the start
# irrelevant.
rng = np.random.default_rng(0)
starts = rng.dirichlet([1, 1, 1], size=6)
for mode in ("project", "stop"):
    maes = [fit_subgradient(train, "pos_score", s, max_iters=20_000, on_boundary=mode).train_mae for s in starts]
    print(f"on_boundary={mode!r}: train MAE from 6 starts ranges {min(maes):.3f} .. {max(maes):.3f}")

# %%
# The trace records the training error at every iteration.
fit = fit_subgradient(train, "pos_score", (0.1, 0.8, 0.1), max_iters=5_000)
for n, a, b, mae in fit.trace[::1000]:
    print(f"iteration {n:5d}: alpha={a:.3f} beta={b:.3f} MAE={mae:.4f}")
