# %% [markdown]
# # Layer sweep through the command line
#
# The `qtfwp` command wraps data generation, training, sweeps and evaluation.
# Here a short sweep over 1 to 3 QNN layers runs in a scratch directory and the
# resulting table is printed. Pass `--jobs N` (or set QTFWP_JOBS) to train
# cells in parallel.

# %%
import csv
import tempfile
from pathlib import Path

from qtfwp.cli import main

# %%
out = Path(tempfile.mkdtemp()) / "sweep"
main(["sweep", "--dataset", "shm", "--layers", "1,2,3", "--repeats", "2",
      "--epochs", "10", "--svg", "--out", str(out)])
with open(out / "sweep.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        print(f"layers {row['qt_layers']}  seed {row['seed']}  quantum params "
              f"{row['census_quantum']}  final train {float(row['final_train_loss']):.3e}")
print("plot:", out / "sweep.svg")

# %% [markdown]
# Every cell keeps its own run directory with a manifest, so any cell can be
# re-scored later with `qtfwp eval --manifest <cell>/run.json`.

# %%
main(["eval", "--manifest", str(out / "L1_r0" / "run.json")])
