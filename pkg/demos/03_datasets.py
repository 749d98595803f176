# %% [markdown]
# # Benchmark series and windowing
#
# Three synthetic series are built in: a damped oscillator, the NARMA5
# recurrence and a gravitational-wave-like chirp. Any two-column `t,value` CSV
# can be used instead.

# %%
import numpy as np

from qtfwp.datasets import GwConfig, gen_damped_shm, gen_gw_strain, gen_narma5, make_windows

# %%
shm = gen_damped_shm()
narma = gen_narma5(seed=0)
gw = gen_gw_strain(GwConfig(seed=0))
for s in (shm, narma, gw):
    print(f"{s.name:8s} {len(s):5d} points, range [{s.x.min():+.3f}, {s.x.max():+.3f}]")

# %% [markdown]
# With zero input, NARMA5 settles at the smaller root of 0.25 y^2 - 0.7 y + 0.1.

# %%
quiet = gen_narma5(501, u=np.zeros(501))
print("y(500) =", quiet.x[500], " fixed point =", (0.7 - np.sqrt(0.39)) / 0.5)

# %% [markdown]
# Windowing turns a series into (4 consecutive values, next value) pairs. The
# min-max scale comes from the training segment only, so the GW merger, which
# happens after the split, overshoots 1 on the normalized scale.

# %%
ds = make_windows(gw, w=4, split_fraction=0.67)
print("windows:", ds.windows.shape, " train/test split at", ds.split_index)
print("train target range:", ds.train[1].min(), ds.train[1].max())
print("test target max:   ", ds.test[1].max())
