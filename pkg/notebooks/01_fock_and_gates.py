# %% [markdown]
# # Truncated Fock space and the ansatz gates
#
# A qumode is simulated on `N` Fock levels. The ansatz alternates a qubit
# rotation with a qubit-conditioned displacement; the joint register is
# ordered qubit first, so the index of `|q, n>` is `q * N + n`.

# %%
import math

import numpy as np

from qumodeprep import AnsatzConfig, FockCutoff, annihilation, apply_ansatz, partial_trace_qubit, vp_gate

cut = FockCutoff(10)
a = annihilation(cut)
comm = a @ a.conj().T - a.conj().T @ a
print("diag([a, a+]) =", np.round(np.diag(comm).real, 12))

# %% [markdown]
# The commutator is the identity except in the top level, where truncation
# leaves `1 - N`. Displacing the vacuum shows the same truncation effect:
# low levels match the coherent series, the last ones absorb the leaked tail.

# %%
psi = vp_gate(1.0, cut) @ np.eye(20)[0]
exact = [math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(10)]
for n in range(10):
    print(f"n={n}  truncated={psi[n].real:+.8f}  exact={exact[n]:+.8f}")

# %% [markdown]
# With the qubit in `|+>` the conditional displacement pushes the mode to
# `+alpha` and `-alpha` at once; tracing out the qubit leaves a mixture.

# %%
cfg = AnsatzConfig(n_layers=1, cutoff=cut)
state = apply_ansatz([1.0, 0.0, 0.0, math.pi / 2, 0.0], cfg)
rho = partial_trace_qubit(state, cut)
print("mode purity:", float(np.real(np.trace(rho @ rho))))
