# %% [markdown]
# # A small benchmark sweep
#
# Cells are replicated with seeded random starts. The aggregate CSV and the
# JSON-lines trial archive land in a scratch directory; the markdown tables
# follow the usual layers / method / infidelity / nfev layout.

# %%
import tempfile
from pathlib import Path

from qumodeprep.bench import emit_report, expand_grid, run_sweep

grid = expand_grid({
    "targets": ["gaussian"], "optimizers": ["powell", "spsa"], "layers": [1, 2],
    "modes": ["ideal"], "trials": 3, "base_seed": 0, "record_trace": True,
})
out = Path(tempfile.mkdtemp(prefix="sweep-"))
rows, trials = run_sweep(grid, out)
for path in emit_report(rows, trials, out):
    print(path.relative_to(out))
print((out / "tables" / "gaussian_mean_5_std_1__ideal.md").read_text())
