#!/usr/bin/env python3
"""Run every named attack against a base election and tabulate the outcomes.

Exit code 0 means every attack ended the way the protocol analysis says
it should: contained everywhere, successful only at receipt proving.
"""

import sys

from blindvote.attacks import ATTACKS, run_attack
from blindvote.scenario import ScenarioConfig, VoterSpec


def main() -> int:
    base = ScenarioConfig(
        st=10,
        ct=20,
        et=30,
        voters=[
            VoterSpec(name="alice", ballot="ALPHA"),
            VoterSpec(name="bob", ballot="BETA"),
            VoterSpec(name="carol", ballot="ALPHA"),
            VoterSpec(name="dora", ballot="BETA"),
        ],
        seed=1,
    )
    print(f"{'attack':16s} {'property':24s} {'outcome':10s} verdict")
    all_ok = True
    for name in sorted(ATTACKS):
        report = run_attack(name, base)
        a = report.attack
        outcome = "succeeded" if a.succeeded else "failed"
        verdict = "as expected" if a.ok else "UNEXPECTED"
        all_ok &= a.ok and report.all_ok()
        print(f"{name:16s} {a.property_exercised:24s} {outcome:10s} {verdict}")
        print(f"{'':16s} {a.detail}")
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
