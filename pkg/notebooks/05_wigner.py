# %% [markdown]
# # Wigner functions of learned states
#
# Convention: hbar = 1, `x = sqrt(2) Re(alpha)`. The non-Gaussian target has
# negative regions; a short SPSA run shows how far the learned state gets.

# %%
import numpy as np

from qumodeprep import AnsatzConfig, Objective, ObjectiveConfig, OptimizerSpec, TargetSpec, minimize
from qumodeprep import apply_ansatz, partial_trace_qubit, wigner

axis = np.linspace(-4, 4, 81)
target = TargetSpec("non_gaussian").resolve()
w_target = wigner(np.outer(target, target.conj()), axis, axis, source="target")
print("target min W:", w_target.values.min())

cfg = ObjectiveConfig(AnsatzConfig(6, 10), target)
f = Objective(cfg)
x0 = np.random.default_rng(0).uniform(-1, 1, 30)
res = minimize(f, x0, OptimizerSpec("spsa", max_iterations=400), rng=np.random.default_rng(1))
rho = partial_trace_qubit(apply_ansatz(res.best_params, cfg.ansatz), 10)
w_learned = wigner(rho, axis, axis, source="learned")
print("learned infidelity:", f.true_infidelity(res.best_params))
print("learned min W:", w_learned.values.min())
print("max |W_target - W_learned|:", np.abs(w_target.values - w_learned.values).max())
