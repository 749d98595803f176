# %% [markdown]
# # Training the full model
#
# `fit` trains the QNN angles, the mapping, the initial fast angles and the
# readout head together with Adam on the windowed MSE. Gradients flow through
# the whole chain analytically. This demo runs 20 epochs; the defaults use 100.

# %%
import numpy as np

from qtfwp.datasets import default_series, make_windows
from qtfwp.training import TrainConfig, evaluate, fit

# %%
ds = make_windows(default_series("shm"), 4, 0.67)
record = fit(TrainConfig(epochs=20, seed=0), ds)
print("census:", tuple(record.census))
for epoch in (1, 5, 10, 20):
    print(f"epoch {epoch:3d}: train {record.train_loss[epoch - 1]:.3e}  "
          f"test {record.test_loss[epoch - 1]:.3e}")
print(f"wall time {record.wall_time:.1f} s")

# %% [markdown]
# Predictions are in normalized units; `denormalize` maps them back.

# %%
loss, preds = evaluate(record.state, ds, "test")
print("test MSE:", loss)
print("first predictions vs targets (raw units):")
print(np.c_[ds.denormalize(preds[:5]), ds.denormalize(ds.test[1][:5])].round(4))
