"""
Telling the two screen laws apart, and how many impacts that takes
==================================================================

The likelihood-ratio classifier reads impact coordinates and reports
wave / particle / indeterminate. The Bhattacharyya overlap rho between the
two laws bounds the error of the optimal test by rho^n / 2, which gives a
closed-form sample-size plan for any target error.
"""

import numpy as np

from dualitysim import (
    OpticsConfig,
    PatternDistribution,
    PatternKind,
    bhattacharyya_coefficient,
    classify_pattern,
    required_sample_size,
)

cfg = OpticsConfig()
rho = bhattacharyya_coefficient(cfg)
print(f"overlap rho = {rho:.6f} (2 sqrt(2) / pi)")

print("\nimpacts needed for a target misclassification bound:")
for target in (0.25, 1e-2, 1e-3, 1e-6):
    plan = required_sample_size(target, cfg)
    print(f"  target {target:g}: n = {plan.n_samples}")

# drive the classifier at the n that targets 1e-3
plan = required_sample_size(1e-3, cfg)
wave = PatternDistribution(PatternKind.WAVE, cfg)
particle = PatternDistribution(PatternKind.PARTICLE, cfg)
rng = np.random.default_rng(33)

errors = 0
replicates = 2000
for dist, want in ((wave, "wave"), (particle, "particle")):
    x = np.asarray(dist.sample(rng, (replicates, plan.n_samples)))
    for row in x:
        verdict = classify_pattern(row, cfg).verdict.value
        if verdict not in (want, "indeterminate"):
            errors += 1
print(f"\nat n = {plan.n_samples}: {errors} hard misclassifications in {2 * replicates} replicates")

# a single impact never decides: per-impact log ratios are clipped
single = classify_pattern(np.array([0.9 * cfg.fringe_scale_m / 2]), cfg)
print(f"one dark-fringe impact: verdict {single.verdict.value}, llr {single.log_likelihood_ratio:+.3f}")
