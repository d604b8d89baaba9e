#!/usr/bin/env python3
"""Regenerate the scenario files shipped under scenarios/.

forest_50ue.toml is the default-parameter reference instance: 50 uniformly
scattered UEs, 3 obstacle discs, -5 dB demand. Note that with the default
channel the best possible link SNR is about -13.8 dB (see the README), so
this file is a stress input: deployment on it is infeasible by construction.

demo_clustered.toml is the feasible counterpart used by the README examples:
six victim clusters, relaxed -40 dB demand, same radio parameters otherwise.
"""

from pathlib import Path

from uavplan.scenario import (
    generate_clustered_scenario,
    generate_random_scenario,
    save_scenario,
)

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> None:
    OUT.mkdir(exist_ok=True)

    reference = generate_random_scenario(seed=42, ue_count=50, obstacle_count=3)
    save_scenario(reference, OUT / "forest_50ue.toml")

    demo = generate_clustered_scenario(
        seed=37,
        ue_count=50,
        cluster_count=6,
        cluster_sigma=80.0,
        obstacle_count=3,
        snr_threshold=-40.0,
    )
    save_scenario(demo, OUT / "demo_clustered.toml")
    print(f"wrote {OUT / 'forest_50ue.toml'}")
    print(f"wrote {OUT / 'demo_clustered.toml'}")


if __name__ == "__main__":
    main()
