# %% [markdown]
# # Error densities of a sigmoid classifier
#
# With targets in {0, 1} and a sigmoid output, the error e = t - y lives in
# (-1, 1). If the projections of the two classes are Gaussian, the error
# density has a closed form. Below we evaluate it for well separated
# classes and compare with a Parzen estimate from a fitted model.

# %%
import numpy as np

from rmee.kernel_density import ClassGaussianParams, parzen_pdf, theoretical_error_pdf

g = ClassGaussianParams(mu0=-5.0, mu1=5.0, var0=5.0, var1=5.0, p=0.5)
grid = np.r_[-np.geomspace(1e-8, 1, 4000)[::-1], np.geomspace(1e-8, 1, 4000)]
dens = theoretical_error_pdf(grid, g)
print(f"global maximum at e = {grid[np.argmax(dens)]:.2e}")
for e in (-0.99, -0.5, -1e-3, 1e-3, 0.5, 0.99):
    print(f"f({e:+.3f}) = {theoretical_error_pdf(e, g):.4g}")

# %% [markdown]
# Most of the mass hugs zero, with thin shoulders near -1 and +1 made of
# the samples that sit on the wrong side of the boundary. Shrinking the
# class gap moves mass towards the shoulders.

# %%
for gap in (5.0, 2.0, 0.5):
    gi = ClassGaussianParams(-gap, gap, 5.0, 5.0)
    near_edge = np.trapezoid(theoretical_error_pdf(np.linspace(0.5, 1, 20001), gi), dx=0.5 / 20000)
    print(f"class gap {gap:3.1f}: P(e > 0.5) = {near_edge:.3f}")

# %% [markdown]
# ## Parzen estimate from a fitted model
#
# Fit C-Loss on a toy with 20% of the labels flipped and look at the
# kernel density of the training errors at the three points 0, -1, 1.

# %%
from rmee.criteria import CriterionSpec
from rmee.data_contamination import ContaminationSpec, contaminate, generate_toy
from rmee.hq_optimizer import count_phi, fit
from rmee.models import lr_init

train, test, _ = generate_toy(400, 400, 5, rng=1)
noisy = contaminate(train, ContaminationSpec("label_maj_to_min", 0.2), rng=1)
model, trace = fit(lr_init(5), noisy.features, noisy.labels, CriterionSpec("CLOSS", sigma=0.3))
errs = noisy.labels - model.predict_proba(noisy.features)
print("density at (0, -1, 1):", np.round(parzen_pdf(np.array([0.0, -1.0, 1.0]), errs, 0.3), 3))
print("band counts (inlier, e<-0.5, e>0.5):", count_phi(errs))
print("true flips:", int((noisy.labels != train.labels).sum()))
