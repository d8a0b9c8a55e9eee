"""How much does the network help, and when does the advantage fade?

Generates block-model graphs where linked nodes share similar individual
effects, then compares the network-smoothed fit against a plain baseline
(no network) and an oracle that knows the true block labels. The spread
parameter ``s`` controls within-block disagreement: at s = 0.1 the network
is very informative, by s = 3 the block structure carries almost no signal.

Improvements pool squared errors across replications:
    improvement = 1 - sum(err_model) / sum(err_baseline).
"""

from netcoh.simulate import SimConfig, run_experiment

S_GRID = (0.1, 1.0, 3.0)
cfg = SimConfig(seed=7, replications=10)
rows = run_experiment(cfg, methods=("rnc", "oracle"), s_grid=S_GRID,
                      family="linear", lambda_grid=[0.3], cv_folds=2)

print(f"{'s':>4} {'method':>8} {'alpha':>8} {'beta':>8} {'prediction':>11}")
for s in S_GRID:
    for method in ("rnc", "oracle"):
        sel = [r for r in rows
               if r["s"] == s and r["method"] == method and not r["error"]]
        imps = [1 - sum(r[f"err_{k}"] for r in sel)
                / sum(r[f"base_err_{k}"] for r in sel)
                for k in ("alpha", "beta", "pred")]
        print(f"{s:>4} {method:>8} {imps[0]:>8.3f} {imps[1]:>8.3f} "
              f"{imps[2]:>11.3f}")

print("\nReading: positive numbers mean the model beats the plain baseline;"
      "\nthe network's edge shrinks as s grows and block cohesion dissolves.")
