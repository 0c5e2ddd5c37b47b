"""A desk-scale counting experiment: R(x,N) tracks Psi(N) with sqrt error.

Samples S points, counts returns up to N at geometric checkpoints, and
checks three things: the final relative error of the median count, an
envelope 4 sqrt(Psi) log^1.6(Psi) + 50 that should hold for ~all (point,
checkpoint) pairs, and the fitted error exponent (theoretical value 1/2,
inflated a little by log factors at desk scale).
"""

import json
from pathlib import Path

import numpy as np

from orbitcount import doubling_map, run_experiment
from orbitcount.counting import geometric_checkpoints
from orbitcount.harness import ExperimentPlan, Thresholds
from orbitcount.rates import power_rate
from orbitcount.svgchart import Series, write_chart

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

plan = ExperimentPlan(
    map=doubling_map(),
    rate=power_rate("1/2", "1/2"),  # psi(n) ~ 1/(2 sqrt n)
    kind="recurrence",
    n_max=10**5,
    samples=60,
    master_seed=20240601,
    checkpoints=tuple(geometric_checkpoints(10**5, minimum=100)),
    thresholds=Thresholds(rel_err=0.08),
)
report = run_experiment(plan)

print("== per-checkpoint statistics (60 points, doubling map) ==")
print(f"  {'N':>7} {'Psi':>9} {'mean R':>9} {'med |R-Psi|':>12} {'envelope ok':>12}")
for s in report.stats:
    print(
        f"  {s.N:>7} {float(s.main_exact):>9.2f} {s.mean_count:>9.2f} "
        f"{s.median_absdev:>12.2f} {s.envelope_fraction:>12.2f}"
    )
fit = report.fit
print(f"\nfitted error exponent: {fit.slope:.3f} (95% band [{fit.band_low:.3f}, {fit.band_high:.3f}])")
print("verdicts:", json.dumps(report.passed, indent=2))

mains = np.array([float(m) for m in report.mains])
dev = np.asarray(report.counts, float) - mains[None, :]
write_chart(
    OUT / "experiment_deviation.svg",
    [
        Series("median R - Psi", report.checkpoints, np.median(dev, axis=0).tolist()),
        Series("q10", report.checkpoints, np.quantile(dev, 0.1, axis=0).tolist(), dashed=True),
        Series("q90", report.checkpoints, np.quantile(dev, 0.9, axis=0).tolist(), dashed=True),
    ],
    title="count deviation from the main term",
    xlabel="N (log)",
    ylabel="R - Psi",
    logx=True,
)
(OUT / "experiment_report.json").write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
print(f"wrote {OUT / 'experiment_deviation.svg'} and experiment_report.json")
