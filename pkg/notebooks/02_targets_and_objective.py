# %% [markdown]
# # Target states and the swap-test objective
#
# The optimizer only sees the swap-test probability `p0 = 0.5 + 0.5 F`,
# transformed into `1 - sqrt(2 (p0 - 0.5))`. In sampled mode `p0` is a
# Binomial estimate.

# %%
import numpy as np

from qumodeprep import AnsatzConfig, ObjectiveConfig, TargetSpec, evaluate

for family in ("local_gaussian", "gaussian", "non_gaussian"):
    spec = TargetSpec(family)
    print(f"{spec.label:36s}", np.round(spec.resolve().real, 3))

# %% [markdown]
# Ideal and sampled evaluations of the same random parameters.

# %%
rng = np.random.default_rng(0)
x = rng.uniform(-1, 1, 5)
target = TargetSpec("local_gaussian").resolve()
ideal = ObjectiveConfig(AnsatzConfig(1, 10), target)
sampled = ObjectiveConfig(AnsatzConfig(1, 10), target, mode="sampled", shots=6144)
rec = evaluate(x, ideal)
print(f"ideal   p0={rec.p0:.5f} objective={rec.objective:.5f}")
draws = [evaluate(x, sampled, rng) for _ in range(2000)]
print(f"sampled p0 mean={np.mean([r.p0 for r in draws]):.5f} sd={np.std([r.p0 for r in draws]):.5f}")
