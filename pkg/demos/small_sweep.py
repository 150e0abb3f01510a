"""A coarse warm-started sweep over omega in [-3, 3], then the plots."""
from schurnorm import cli

out = "out/demo_sweep"
cfg = "demos/small_sweep.toml"
cli.main(["sweep", "--config", cfg, "--output", out])
cli.main(["baselines", "--config", cfg, "--output", out])
cli.main(["plot", "--input", out, "--output", out])
print(open(f"{out}/sweep.csv").read())
