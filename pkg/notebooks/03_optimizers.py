# %% [markdown]
# # One problem, six optimizers
#
# Every optimizer runs from the same start on the local Gaussian target.
# `nfev` counts objective calls; finite-difference probes are counted
# separately, and SPSA reports its iteration count.

# %%
import numpy as np

from qumodeprep import AnsatzConfig, Objective, ObjectiveConfig, OptimizerSpec, TargetSpec, minimize
from qumodeprep.optimizers import KINDS

cfg = ObjectiveConfig(AnsatzConfig(1, 10), TargetSpec("local_gaussian").resolve(), mode="sampled")
x0 = np.random.default_rng(3).uniform(-1, 1, 5)
for kind in KINDS:
    f = Objective(cfg, rng=np.random.default_rng(1))
    spec = OptimizerSpec(kind, fd_step=0.08 if kind in ("cg", "lbfgs") else None)
    res = minimize(f, x0, spec, rng=np.random.default_rng(2))
    print(f"{kind:12s} infidelity={f.true_infidelity(res.best_params):.4f} nfev={res.nfev:5d} "
          f"probes={res.grad_probe_evals:5d} reason={res.termination_reason.value}")
