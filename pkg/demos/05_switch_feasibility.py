"""
The record switch: staged runs and the consistency budget
=========================================================

Stages a-c never make which-way data available, so the screen keeps its
fringes no matter how long the idler path is. Stage d activates the switch
as a function of the observed impact. If outcome (i) held, a strategy that
switches on exactly inside a region I would force total screen probability
delta(I) = P_flat(I) + P_fringe(outside I); the extremal region drives that
to 1 - TV < 1, so the run refuses to pretend and reports the margin.
"""

from dualitysim import (
    DELTA_T_FAST,
    DELTA_T_SLOW,
    FeasibilityReport,
    IntervalSet,
    ObservationSchedule,
    OpticsConfig,
    OutcomeHypothesis,
    Protocol,
    ProtocolConfig,
    SwitchStage,
    SwitchStrategy,
    delta_of_interval_set,
    optimal_interval_set,
    run_switch_experiment,
    tv_distance,
)

optics = OpticsConfig()

# the consistency functional: delta = 1 exactly for degenerate regions
star = optimal_interval_set(optics)
print(f"extremal region I* = {[tuple(round(v * 1e6) for v in p) for p in star]} (micrometers)")
for label, region in (("empty", IntervalSet.empty()), ("full", IntervalSet.full_window(optics)), ("I*", star)):
    print(f"  delta({label:>5}) = {delta_of_interval_set(region, optics):.6f}")
print(f"  1 - TV       = {1 - tv_distance(optics):.6f}")

# stages a-c: fringes for a 10 ns idler path and for a 60 s one
for delta_t in (DELTA_T_FAST, DELTA_T_SLOW):
    cfg = ProtocolConfig(
        protocol=Protocol.SWITCH_EXPERIMENT,
        switch_stage=SwitchStage.C,
        delta_t_s=delta_t,
        coincidence_window_s=delta_t / 10,
        n_pairs=30_000,
        seed=21,
    )
    run = run_switch_experiment(cfg)
    print(f"stage c, delta_t = {delta_t:g} s: verdict {run.subsets['screen'].verdict.value}")


def stage_d(strategy, hypothesis):
    return run_switch_experiment(
        ProtocolConfig(
            protocol=Protocol.SWITCH_EXPERIMENT,
            switch_stage=SwitchStage.D,
            observation_schedule=ObservationSchedule.AT_T0,
            strategy=strategy,
            outcome_hypothesis=hypothesis,
            n_pairs=30_000,
            seed=22,
        )
    )


# stage d under each outcome hypothesis
print("\nstage d with the extremal strategy:")
outcome = stage_d(SwitchStrategy.strategy_1(star), OutcomeHypothesis.I)
assert isinstance(outcome, FeasibilityReport)
print(f"  (i)   refused: delta = {outcome.delta_value:.4f}, margin = {outcome.margin:.4f} ({outcome.marker})")

for hyp in (OutcomeHypothesis.II, OutcomeHypothesis.III, OutcomeHypothesis.IV):
    run = stage_d(SwitchStrategy.strategy_1(star), hyp)
    verdict = run.pooled.verdict.value if run.pooled is not None else "none"
    print(f"  ({hyp.value}){' ' * (4 - len(hyp.value))}markers={run.markers}  pooled verdict: {verdict}")

# degenerate strategies stay consistent under (i)
run = stage_d(SwitchStrategy.always_on(), OutcomeHypothesis.I)
print(f"  (i) always-on completes: delta = {run.feasibility.delta_value:.4f}, "
      f"switch_on verdict {run.subsets['switch_on'].verdict.value}")
