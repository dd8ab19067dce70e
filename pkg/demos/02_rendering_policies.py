"""
Where the two rendering policies part ways
==========================================

COLLAPSE_AT_DETECTION keys the screen law to the detection event itself;
RENDER_AT_AVAILABILITY keys it to whether an objective which-way record is
still live when the pattern is examined. Most benches agree. The ones below
do not, and the disagreement is the whole point of simulating them.
"""

from dualitysim import (
    DetectNoRecordVariant,
    Protocol,
    ProtocolConfig,
    RenderingModel,
    RenderingPolicy,
    run_protocol,
)

POLICIES = {
    "collapse": RenderingModel(RenderingPolicy.COLLAPSE_AT_DETECTION),
    "render": RenderingModel(RenderingPolicy.RENDER_AT_AVAILABILITY),
}


def verdicts(cfg):
    run = run_protocol(cfg)
    return {key: sub.verdict.value for key, sub in sorted(run.subsets.items())}


print("agreeing benches first:")
for recording in (True, False):
    row = {}
    for name, model in POLICIES.items():
        cfg = ProtocolConfig(
            protocol=Protocol.DOUBLE_SLIT,
            model=model,
            detectors_recording=recording,
            n_pairs=30_000,
            seed=1,
        )
        row[name] = verdicts(cfg)["screen"]
    print(f"  double slit, detectors_recording={recording}: {row}")

# detectors fire, but nothing objective survives: the policies disagree
print("\ndetectors without records:")
for variant in DetectNoRecordVariant:
    row = {}
    for name, model in POLICIES.items():
        cfg = ProtocolConfig(
            protocol=Protocol.DETECT_NO_RECORD,
            variant=variant,
            model=model,
            n_pairs=30_000,
            seed=2,
        )
        subset = "unsorted" if variant is DetectNoRecordVariant.WHICH_WAY_CHANNELS_OFF else "screen"
        row[name] = verdicts(cfg)[subset]
    print(f"  {variant.value:>24}: {row}")

# records destroyed an hour after the impacts, pattern examined afterwards
print("\nmacroscopic erasure at a one-minute delay:")
for name, model in POLICIES.items():
    cfg = ProtocolConfig(
        protocol=Protocol.MACROSCOPIC_ERASURE,
        model=model,
        erasure_delay_s=60.0,
        n_pairs=30_000,
        seed=3,
    )
    print(f"  {name:>8}: {verdicts(cfg)}")
