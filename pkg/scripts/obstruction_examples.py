#!/usr/bin/env python3
"""Run the obstruction certifier over a gallery of Betti profiles: spheres,
products, connected sums, and profiles sitting right at the dimension-four
and dimension-five thresholds."""

from geoflow import BettiProfile, certify

EXAMPLES = [
    ("round four-sphere", BettiProfile(4, [1, 0, 0, 0, 1], formal=True, chi=2, tau=0)),
    ("product of two two-spheres", BettiProfile(4, [1, 0, 2, 0, 1], formal=True, chi=4, tau=0)),
    ("chi = 10 profile", BettiProfile(4, [1, 0, 8, 0, 1], formal=True, chi=10, tau=0)),
    ("K3-like profile", BettiProfile(4, [1, 0, 22, 0, 1], formal=True, chi=24, tau=-16)),
    ("dim-4 cap, last admitted", BettiProfile(4, [1, 0, 230, 0, 1], formal=True)),
    ("dim-4 cap, first rejected", BettiProfile(4, [1, 0, 231, 0, 1], formal=True)),
    ("sum of 2 copies of S^3 x S^2", BettiProfile(5, [1, 0, 2, 2, 0, 1], formal=True)),
    ("sum of 383882339 copies of S^3 x S^2",
     BettiProfile(5, [1, 0, 383882339, 383882339, 0, 1], formal=True)),
]


def main():
    for name, profile in EXAMPLES:
        report = certify(profile)
        failed = [t.name for t in report.tests if t.applicable and t.passed is False]
        status = "OBSTRUCTED via " + ", ".join(failed) if failed else "no obstruction"
        print(f"{name:42s} {status}")


if __name__ == "__main__":
    main()
