"""Optimize the Schur test functions for the Mackey-Glass kernel at omega = 0.

Prints the bound next to the Nystrom, truncation and L2 norms and writes the
convergence history and its plot to ``out/demo_zero``.
"""
from pathlib import Path

from schurnorm.baselines import nystrom_norm
from schurnorm.plots import plot_convergence
from schurnorm.sweep import Estimator, RunConfig, history_csv

out = Path("out/demo_zero")
out.mkdir(parents=True, exist_ok=True)

est = Estimator(RunConfig())
record, state = est.run(0.0)
problem = est.problem(0.0)

print(f"converged={record.converged} after {record.iterations} iterations, "
      f"{record.ref_points} reference points")
print(f"Schur bound (fine grid)   {record.schur_estimate:.6f}")
print(f"Schur bound (coarse grid) {record.coarse_estimate:.6f}")
print(f"Nystrom norm of |K|       {nystrom_norm(problem.kabs, est.grid, est.grid):.6f}")
print(f"N=50 truncation norm      {record.truncation_norm:.6f}")
print(f"L2 norm of K              {record.l2_norm_k:.6f}")
print(f"1/Lambda                  {est.config.threshold():.6f}")

(out / "history.csv").write_text(history_csv(state))
plot_convergence(out / "history.csv", out / "convergence.svg")
print(f"wrote {out}/history.csv and {out}/convergence.svg")
