# %% [markdown]
# # Generating classical weights from a 7-qubit QNN
#
# The slow programmer is a small tanh network with 106 weights. Instead of
# training those weights directly, a 7-qubit circuit produces 128 basis
# probabilities, and a 9-parameter affine map turns the first 106 of them
# (together with the bits of each index) into the 106 weights.

# %%
import numpy as np

from qtfwp.programmer import SLOW_SIZE, count_parameters
from qtfwp.quantum_train import MappingParams, QtModel, generate_slow_weights, qnn_probabilities
from qtfwp.training import TrainableState

# %% [markdown]
# With all circuit angles at zero the Hadamard layer leaves a uniform
# distribution over the 128 basis states.

# %%
p = qnn_probabilities(np.zeros(7))
print("min/max probability at gamma = 0:", p.min(), p.max(), " 1/128 =", 1 / 128)

# %% [markdown]
# Turning the angles changes the distribution, and the mapping converts it into
# a full set of slow-programmer weights.

# %%
rng = np.random.default_rng(1)
gamma = rng.uniform(-np.pi, np.pi, 14)          # two QNN layers
beta = MappingParams(rng.normal(0, 0.1, 7), prob_weight=0.5, bias=0.0)
slow = generate_slow_weights(QtModel(gamma, beta))
print("generated weights:", slow.flat().size, "== SLOW_SIZE", SLOW_SIZE)
print("encoder weights:", slow.encoder_w.ravel().round(3))

# %% [markdown]
# The parameter census counts what is actually trained: 9 mapping parameters
# plus the 5-parameter readout head on the classical side, and the 16 fast
# circuit angles plus 7 QNN angles per layer on the quantum side.

# %%
for layers in (1, 2, 3):
    state = TrainableState.initialize(layers, np.random.default_rng(0))
    print(f"{layers} QNN layer(s): census {tuple(count_parameters(state))}")
