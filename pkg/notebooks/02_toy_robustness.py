# %% [markdown]
# # Attribute outliers on the Gaussian toy
#
# A small version of the toy sweep: d = 20, 1000 training and 1000 test
# samples, a growing share of training rows replaced by N(0, 100 I) noise.
# Each cell is repeated a few times; raise `REPS` for smoother curves.

# %%
import numpy as np

from rmee.bench import ExperimentPlan, ToySource, emit_plot_data, run_experiment, toy_grid

REPS = 3
plan = ExperimentPlan(
    ToySource(1000, 1000, 20, 0.0),
    toy_grid("attribute", [0.0, 0.2, 0.4, 0.6], covariances=[100.0]),
    criteria=("CE", "MSE", "CLOSS", "QMEE", "RMEE"),
    repetitions=REPS,
    sigma=0.5,
)
rows = run_experiment(plan)

# %%
props = sorted({r.proportion for r in rows})
print("crit   " + "  ".join(f"p={p:.1f} " for p in props))
for crit in plan.criteria:
    cells = {r.proportion: r for r in rows if r.criterion == crit}
    print(f"{crit:6s} " + "  ".join(f"{cells[p].mean_accuracy:.3f}" for p in props))

# %% [markdown]
# CE follows the outliers, whose huge attribute values dominate its
# gradient. The kernel criteria ignore samples whose errors sit far from
# the code words. Write the curves for an external plotting tool:

# %%
for path in emit_plot_data(rows, "/tmp/toy_attr"):
    print(path)

# %% [markdown]
# ## Unbalanced classes and label flips
#
# Shifting the attribute mean to 0.4 makes roughly 63% of the samples
# one class. Flipping majority labels then pulls the boundary hard.

# %%
plan = ExperimentPlan(
    ToySource(1000, 1000, 20, 0.4),
    toy_grid("label_maj_to_min", [0.0, 0.2, 0.4]),
    criteria=("CE", "CLOSS", "RMEE"),
    repetitions=REPS,
    sigma=0.5,
)
for r in run_experiment(plan):
    print(f"{r.criterion:6s} p={r.proportion:.1f} acc={r.mean_accuracy:.3f} +- {r.std_accuracy:.3f}")
